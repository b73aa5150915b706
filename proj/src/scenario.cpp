#include "socsim/scenario.hpp"

#include <fstream>
#include <set>

namespace socsim::harness {

ScenarioScript parse_scenario(const Json& doc) {
  if (!doc.is_object()) fail(ErrorCode::invalid, "scenario must be a JSON object");
  ScenarioScript s;
  s.seed = doc.value("seed", std::uint64_t{1});
  s.durationSeconds = doc.value("durationSeconds", 0.0);
  s.quiesceSeconds = doc.value("quiesceSeconds", 1.0);
  s.teacherToken = doc.value("teacherToken", std::string{});

  for (const auto& a : doc.value("actors", Json::array())) {
    ScenarioActor actor;
    actor.ref = a.at("ref").get<std::string>();
    actor.role = a.at("role").get<Role>();
    actor.displayName = a.value("displayName", actor.ref);
    if (a.contains("region") && !a.at("region").is_null()) actor.region = a.at("region").get<std::string>();
    actor.joinAt = a.value("joinAt", 0.0);
    s.actors.push_back(std::move(actor));
  }
  for (const auto& st : doc.value("steps", Json::array())) {
    ScenarioStep step;
    step.at = st.at("at").get<double>();
    step.actor = st.at("actor").get<std::string>();
    step.command = st.at("command");
    s.steps.push_back(std::move(step));
  }
  if (doc.contains("swarm")) {
    const Json& w = doc.at("swarm");
    s.swarm.studentCount = w.value("studentCount", std::size_t{0});
    s.swarm.regionSpread = w.value("regionSpread", std::vector<std::string>{});
    s.swarm.chatRatePerStudentPerMinute = w.value("chatRatePerStudentPerMinute", 0.0);
    s.swarm.triageProbability = w.value("triageProbability", 0.0);
  }
  return s;
}

ScenarioScript load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::invalid, "cannot read scenario " + path.string());
  Json doc = Json::parse(in, nullptr, false);
  if (doc.is_discarded()) fail(ErrorCode::invalid, "scenario " + path.string() + " is not valid JSON");
  return parse_scenario(doc);
}

std::vector<ScenarioActor> expand_actors(const ScenarioScript& script) {
  std::vector<ScenarioActor> out = script.actors;
  const auto& spread = script.swarm.regionSpread;
  for (std::size_t i = 0; i < script.swarm.studentCount; ++i) {
    ScenarioActor a;
    a.ref = "s" + std::to_string(i + 1);
    a.displayName = "student-" + std::to_string(i + 1);
    a.role = Role::student;
    if (!spread.empty()) a.region = spread[i % spread.size()];
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<std::string> validate_scenario(const ScenarioScript& script) {
  std::vector<std::string> issues;
  std::set<std::string> refs;
  for (const auto& a : expand_actors(script)) {
    if (!refs.insert(a.ref).second) issues.push_back("duplicate actor ref " + a.ref);
    if (a.joinAt < 0) issues.push_back("actor " + a.ref + " has a negative joinAt");
  }
  double last = 0.0;
  for (std::size_t i = 0; i < script.steps.size(); ++i) {
    const auto& step = script.steps[i];
    if (step.at < last) issues.push_back("step " + std::to_string(i) + " goes back in time");
    last = std::max(last, step.at);
    if (refs.count(step.actor) == 0) issues.push_back("step " + std::to_string(i) + " uses undeclared actor " + step.actor);
    if (!step.command.is_object() || !step.command.contains("kind")) {
      issues.push_back("step " + std::to_string(i) + " has no command kind");
    }
  }
  if (script.swarm.triageProbability < 0 || script.swarm.triageProbability > 1) {
    issues.push_back("triageProbability must be within [0, 1]");
  }
  if (script.swarm.chatRatePerStudentPerMinute < 0) issues.push_back("chat rate must be non-negative");
  return issues;
}

std::vector<Json> ClientTranscript::parsed() const {
  std::vector<Json> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(Json::parse(f.text, nullptr, false));
  return out;
}

const ClientTranscript* RunTranscript::find(const std::string& ref) const {
  for (const auto& c : clients) {
    if (c.ref == ref) return &c;
  }
  return nullptr;
}

void write_transcripts(const RunTranscript& run, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& c : run.clients) {
    std::ofstream out(dir / (c.ref + ".jsonl"), std::ios::trunc);
    for (const auto& f : c.frames) {
      out << Json{{"recvAt", f.recvAtMs}, {"frame", Json::parse(f.text, nullptr, false)}}.dump() << '\n';
    }
  }
  std::ofstream(dir / "export.json", std::ios::trunc) << run.serverExport.dump(2) << '\n';
}

}  // namespace socsim::harness
