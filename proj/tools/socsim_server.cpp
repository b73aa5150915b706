#include <atomic>
#include <csignal>
#include <iostream>
#include <thread>

#include "socsim/config.hpp"
#include "socsim/server.hpp"

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

}  // namespace

int main(int argc, char** argv) {
  socsim::ExerciseConfig config;
  socsim::TemplateCatalog catalog;
  try {
    config = socsim::load_config(argc, argv, socsim::process_env);
    catalog = socsim::load_catalog_for(config);
  } catch (const socsim::HelpRequested& help) {
    std::cout << help.text;
    return 0;
  } catch (const socsim::ConfigError& e) {
    for (const auto& v : e.violations()) std::cerr << "config: " << v << '\n';
    return 2;
  }

  socsim::Server server(config, catalog);
  unsigned short port = 0;
  try {
    port = server.start();
  } catch (const std::exception& e) {
    std::cerr << "cannot listen on " << config.bindAddress << ':' << config.port << ": " << e.what() << '\n';
    return 1;
  }

  std::cout << "listening on " << config.bindAddress << ':' << port << '\n'
            << "seed " << config.seed << (config.seedGenerated ? " (generated)" : "") << '\n';
  if (config.tokenGenerated) std::cout << "teacher token " << config.teacherToken << '\n';
  std::cout.flush();

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::atomic<bool> done{false};
  std::thread watcher([&] {
    while (!done) {
      if (g_stop) {
        server.stop();
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(100));
    }
  });

  server.run();
  done = true;
  watcher.join();
  return 0;
}
