#pragma once

#include <memory>

#include "socsim/config.hpp"

namespace socsim {

// HTTP + WebSocket front end around one Exercise. Everything, including the
// exercise, runs on a single io_context thread, which makes that thread the
// exercise's only writer.
//
//   GET /healthz      {"status":"ok","uptimeSeconds":n}
//   GET /api/export   debrief JSON; needs X-Teacher-Token or a Bearer token
//   GET /ws           WebSocket upgrade, the exercise protocol
//   GET /, /<file>    static files from webRoot
class Server {
 public:
  // `config.port` 0 binds an ephemeral port.
  Server(ExerciseConfig config, TemplateCatalog catalog);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  // Binds and listens; returns the bound port.
  unsigned short start();
  // Serves until stop(). Call from the thread that should own the exercise.
  void run();
  // Safe from any thread.
  void stop();

  struct Impl;  // opaque; shared with the connection classes

 private:
  std::shared_ptr<Impl> impl_;
};

}  // namespace socsim
