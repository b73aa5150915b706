#include <gtest/gtest.h>

#include <functional>
#include <set>

#include "socsim/protocol.hpp"
#include "support.hpp"

using namespace socsim;
using namespace socsim::testing;

namespace {

ErrorCode code_of(const std::function<void()>& op) {
  try {
    op();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::unknown_kind;
}

std::size_t frames_of_kind(const std::vector<protocol::Outbound>& frames, std::string_view kind) {
  return static_cast<std::size_t>(
      std::count_if(frames.begin(), frames.end(), [&](const auto& f) { return f.kind == kind; }));
}

}  // namespace

TEST(Join, StudentWithRegion) {
  Exercise ex = make_exercise();
  const auto r = ex.join(Hello{"Ana", Role::student, "Europe", std::nullopt}, t0());
  EXPECT_EQ(r.session.region, "Europe");
  EXPECT_TRUE(r.session.connected);
  EXPECT_EQ(r.entry.action, AuditAction::join);
  EXPECT_EQ(r.entry.actor, r.session.clientId);
  EXPECT_EQ(ex.sessions().find(r.session.clientId)->displayName, "Ana");
}

TEST(Join, DisplayNameIsTrimmedAndBounded) {
  Exercise ex = make_exercise();
  EXPECT_EQ(ex.join(Hello{"  Bo  ", Role::student, std::nullopt, std::nullopt}, t0()).session.displayName, "Bo");
  EXPECT_EQ(code_of([&] { ex.join(Hello{"   ", Role::student, std::nullopt, std::nullopt}, t0()); }),
            ErrorCode::invalid);
  EXPECT_EQ(code_of([&] { ex.join(Hello{std::string(41, 'x'), Role::student, std::nullopt, std::nullopt}, t0()); }),
            ErrorCode::invalid);
  // 40 code points of two bytes each are still within the limit.
  std::string wide;
  for (int i = 0; i < 40; ++i) wide += "\xC3\xA9";
  EXPECT_NO_THROW(ex.join(Hello{wide, Role::student, std::nullopt, std::nullopt}, t0()));
}

TEST(Join, UnknownRegionIsInvalid) {
  Exercise ex = make_exercise();
  EXPECT_EQ(code_of([&] { ex.join(Hello{"Ana", Role::student, "Atlantis", std::nullopt}, t0()); }),
            ErrorCode::invalid);
  EXPECT_TRUE(ex.audit().empty());
}

TEST(Join, TeacherTokenChecked) {
  Exercise ex = make_exercise();
  EXPECT_EQ(code_of([&] { ex.join(Hello{"T", Role::teacher, std::nullopt, std::string("wrong")}, t0()); }),
            ErrorCode::forbidden);
  EXPECT_EQ(code_of([&] { ex.join(Hello{"T", Role::teacher, std::nullopt, std::nullopt}, t0()); }),
            ErrorCode::forbidden);
  const auto id = join_teacher(ex);
  EXPECT_EQ(ex.sessions().find(id)->role, Role::teacher);
  EXPECT_FALSE(ex.sessions().find(id)->region.has_value());
}

TEST(Join, EmptyConfiguredTokenLocksOutTeachers) {
  auto s = settings();
  s.teacherToken.clear();
  Exercise ex(s, default_catalog(), t0());
  EXPECT_EQ(code_of([&] { ex.join(Hello{"T", Role::teacher, std::nullopt, std::string()}, t0()); }),
            ErrorCode::forbidden);
}

TEST(Join, ThirdTeacherRejected) {
  Exercise ex = make_exercise();
  join_teacher(ex);
  const auto second = join_teacher(ex);
  EXPECT_EQ(code_of([&] { join_teacher(ex); }), ErrorCode::precondition);
  ex.leave(second, t0());
  EXPECT_NO_THROW(join_teacher(ex));
}

TEST(Join, AutoAssignmentSpreadsStudentsEvenly) {
  Exercise ex = make_exercise();
  std::map<std::string, int> per_region;
  for (int i = 0; i < 20; ++i) {
    const auto id = join_student(ex, "s" + std::to_string(i), std::nullopt);
    ++per_region[*ex.sessions().find(id)->region];
  }
  ASSERT_EQ(per_region.size(), 4u);
  for (const auto& [region, n] : per_region) EXPECT_EQ(n, 5) << region;
}

TEST(Join, AutoAssignmentFillsTheEmptiestRegion) {
  Exercise ex = make_exercise();
  for (int i = 0; i < 3; ++i) join_student(ex, "eu" + std::to_string(i), "Europe");
  join_student(ex, "na", "North America");
  join_student(ex, "ap", "Asia-Pacific");
  const auto id = join_student(ex, "new", std::nullopt);
  EXPECT_EQ(ex.sessions().find(id)->region, "South America");
}

TEST(Join, IdsAreUniqueAcrossRejoins) {
  Exercise ex = make_exercise();
  const auto a = join_student(ex, "Ana", "Europe");
  ex.leave(a, t0());
  const auto b = join_student(ex, "Ana", "Europe");
  EXPECT_NE(a, b);
  EXPECT_EQ(ex.sessions().all().size(), 2u);
}

TEST(Leave, ClosedAndTimedOut) {
  Exercise ex = make_exercise();
  const auto a = join_student(ex, "Ana", "Europe");
  const auto entry = ex.leave(a, at_s(1));
  ASSERT_TRUE(entry);
  EXPECT_EQ(entry->actor, a);
  EXPECT_EQ(entry->payload.at("reason"), "closed");
  EXPECT_FALSE(ex.sessions().find(a)->connected);
  EXPECT_FALSE(ex.leave(a, at_s(2)).has_value());
  EXPECT_FALSE(ex.leave("nobody", at_s(2)).has_value());
}

TEST(Leave, PresenceTimeoutBoundary) {
  Exercise ex = make_exercise();
  const auto a = join_student(ex, "Ana", "Europe");
  ex.heartbeat(a, at_s(10));
  EXPECT_TRUE(ex.sweep_presence(at_s(39)).empty());  // 29 s of silence
  const auto gone = ex.sweep_presence(at_s(41));     // 31 s of silence
  ASSERT_EQ(gone.size(), 1u);
  EXPECT_EQ(gone[0].actor, kSystemActor);
  EXPECT_EQ(gone[0].payload.at("reason"), "timeout");
  EXPECT_FALSE(ex.sessions().find(a)->connected);
}

TEST(Leave, DisconnectedClientsCannotAct) {
  Exercise ex = make_exercise();
  const auto a = join_student(ex, "Ana", "Europe");
  ex.leave(a, t0());
  EXPECT_EQ(code_of([&] { ex.post_message(a, "Europe", "hi", t0()); }), ErrorCode::forbidden);
  EXPECT_EQ(code_of([&] { ex.post_message("c99", "Europe", "hi", t0()); }), ErrorCode::forbidden);
}

TEST(Assign, MovesStudentAndChangesChatMembership) {
  Exercise ex = make_exercise();
  const auto t = join_teacher(ex);
  const auto a = join_student(ex, "Ana", "Europe");
  const auto entry = ex.assign_region(t, a, "Asia-Pacific", at_s(1));
  EXPECT_EQ(entry.payload.at("previous"), "Europe");
  EXPECT_EQ(ex.sessions().find(a)->region, "Asia-Pacific");
  EXPECT_EQ(code_of([&] { ex.post_message(a, "Europe", "hi", at_s(2)); }), ErrorCode::forbidden);
  EXPECT_NO_THROW(ex.post_message(a, "Asia-Pacific", "hi", at_s(2)));

  const auto frames = protocol::plan_fanout(ex, entry);
  ASSERT_EQ(frames_of_kind(frames, "snapshot"), 1u);
  for (const auto& f : frames) {
    if (f.kind == "snapshot") EXPECT_EQ(f.to, a);
  }
}

TEST(Assign, Rejections) {
  Exercise ex = make_exercise();
  const auto t = join_teacher(ex);
  const auto a = join_student(ex, "Ana", "Europe");
  EXPECT_EQ(code_of([&] { ex.assign_region(a, a, "Asia-Pacific", t0()); }), ErrorCode::forbidden);
  EXPECT_EQ(code_of([&] { ex.assign_region(t, a, "Atlantis", t0()); }), ErrorCode::invalid);
  EXPECT_EQ(code_of([&] { ex.assign_region(t, "c99", "Europe", t0()); }), ErrorCode::not_found);
  EXPECT_EQ(code_of([&] { ex.assign_region(t, t, "Europe", t0()); }), ErrorCode::invalid);
}

TEST(Chat, RegionMessageReachesRegionAndTeachers) {
  Exercise ex = make_exercise();
  const auto t = join_teacher(ex);
  std::vector<ClientId> eu;
  for (int i = 0; i < 20; ++i) {
    const auto id = join_student(ex, "s" + std::to_string(i), std::nullopt);
    if (ex.sessions().find(id)->region == "Europe") eu.push_back(id);
  }
  ASSERT_EQ(eu.size(), 5u);
  const auto entry = ex.post_message(eu[0], "Europe", "suspicious login burst", at_s(1));
  const auto frames = protocol::plan_fanout(ex, entry);
  EXPECT_EQ(frames_of_kind(frames, "chat.message"), 6u);
  std::set<ClientId> recipients;
  for (const auto& f : frames) recipients.insert(f.to);
  std::set<ClientId> expected(eu.begin(), eu.end());
  expected.insert(t);
  EXPECT_EQ(recipients, expected);
}

TEST(Chat, BodyRules) {
  Exercise ex = make_exercise();
  const auto a = join_student(ex, "Ana", "Europe");
  EXPECT_EQ(code_of([&] { ex.post_message(a, "Europe", "   ", t0()); }), ErrorCode::invalid);
  EXPECT_EQ(code_of([&] { ex.post_message(a, "Europe", std::string(1001, 'x'), t0()); }), ErrorCode::invalid);
  EXPECT_NO_THROW(ex.post_message(a, "Europe", std::string(1000, 'x'), t0()));
  EXPECT_EQ(code_of([&] { ex.post_message(a, "nowhere", "hi", t0()); }), ErrorCode::invalid);
  const auto entry = ex.post_message(a, "Europe", "  padded  ", t0());
  EXPECT_EQ(entry.payload.at("body"), "padded");
}

TEST(Chat, Membership) {
  Exercise ex = make_exercise();
  const auto t = join_teacher(ex);
  const auto a = join_student(ex, "Ana", "Europe");
  const auto b = join_student(ex, "Bo", "Europe");
  EXPECT_EQ(code_of([&] { ex.post_message(a, "Asia-Pacific", "hi", t0()); }), ErrorCode::forbidden);
  EXPECT_EQ(code_of([&] { ex.post_message(a, "broadcast", "hi", t0()); }), ErrorCode::forbidden);
  EXPECT_NO_THROW(ex.post_message(t, "broadcast", "all hands", t0()));
  EXPECT_NO_THROW(ex.post_message(t, "Asia-Pacific", "hi", t0()));

  // Instructor channel: a student sees their own questions and teacher posts.
  ex.post_message(a, "instructor", "question from a", t0());
  ex.post_message(b, "instructor", "question from b", t0());
  ex.post_message(t, "instructor", "answer", t0());
  auto bodies = [&](const ClientId& reader) {
    std::vector<std::string> out;
    for (const auto& m : ex.chat().history(*ex.sessions().find(reader), "instructor", 100)) out.push_back(m.body);
    return out;
  };
  EXPECT_EQ(bodies(a), (std::vector<std::string>{"question from a", "answer"}));
  EXPECT_EQ(bodies(b), (std::vector<std::string>{"question from b", "answer"}));
  EXPECT_EQ(bodies(t).size(), 3u);
  EXPECT_EQ(code_of([&] { ex.chat().history(*ex.sessions().find(a), "Asia-Pacific", 10); }),
            ErrorCode::forbidden);
}

TEST(Chat, HistoryLimitAndOrder) {
  Exercise ex = make_exercise();
  const auto a = join_student(ex, "Ana", "Europe");
  for (int i = 0; i < 10; ++i) ex.post_message(a, "Europe", "m" + std::to_string(i), at_s(i));
  const auto& reader = *ex.sessions().find(a);
  EXPECT_TRUE(ex.chat().history(reader, "Europe", 0).empty());
  const auto last3 = ex.chat().history(reader, "Europe", 3);
  ASSERT_EQ(last3.size(), 3u);
  EXPECT_EQ(last3[0].body, "m7");
  EXPECT_EQ(last3[2].body, "m9");
  EXPECT_LT(last3[0].id, last3[1].id);
}

// Chat history equals the chat entries of the audit log filtered by the
// reader's membership, recomputed here from the raw log.
TEST(Chat, HistoryMatchesAuditLog) {
  Exercise ex = make_exercise();
  const auto t = join_teacher(ex);
  std::vector<ClientId> students;
  for (int i = 0; i < 8; ++i) students.push_back(join_student(ex, "s" + std::to_string(i), std::nullopt));
  std::mt19937_64 rng(5);
  const std::vector<std::string> channels{"North America", "Europe", "Asia-Pacific", "South America",
                                          "instructor", "broadcast"};
  int posted = 0;
  for (int i = 0; i < 400; ++i) {
    const bool teacher = rng() % 4 == 0;
    const ClientId sender = teacher ? t : students[rng() % students.size()];
    try {
      ex.post_message(sender, channels[rng() % channels.size()], "msg " + std::to_string(i), at_s(i));
      ++posted;
    } catch (const Error&) {
    }
  }
  ASSERT_GT(posted, 100);

  for (const auto& reader_id : students) {
    const auto& reader = *ex.sessions().find(reader_id);
    for (const auto& channel : channels) {
      std::vector<std::uint64_t> expected;
      for (const auto& entry : ex.audit()) {
        if (entry.action != AuditAction::chat || entry.payload.at("channel") != channel) continue;
        const bool region_ok = channel == *reader.region;
        const bool broadcast = channel == "broadcast";
        const bool instructor = channel == "instructor" &&
                                (entry.actor == reader_id || entry.payload.at("senderRole") == "teacher");
        if (region_ok || broadcast || instructor) expected.push_back(entry.seq);
      }
      std::vector<std::uint64_t> actual;
      try {
        for (const auto& m : ex.chat().history(reader, channel, 1000)) actual.push_back(m.id);
      } catch (const Error&) {
      }
      EXPECT_EQ(actual, expected) << reader_id << " " << channel;
    }
  }
}

TEST(Presence, JoinLeaveFanout) {
  Exercise ex = make_exercise();
  const auto t = join_teacher(ex);
  const auto a = join_student(ex, "Ana", "Europe");
  const auto join = ex.join(Hello{"Bo", Role::student, "Europe", std::nullopt}, t0());
  auto frames = protocol::plan_fanout(ex, join.entry);
  EXPECT_EQ(frames_of_kind(frames, "presence"), 2u);  // everyone but the joiner
  for (const auto& f : frames) EXPECT_NE(f.to, join.session.clientId);

  const auto leave = ex.leave(a, at_s(1));
  frames = protocol::plan_fanout(ex, *leave);
  EXPECT_EQ(frames_of_kind(frames, "presence"), 2u);
  const auto roster = protocol::presence_json(ex);
  EXPECT_EQ(roster.size(), 3u);
  for (const auto& p : roster) {
    if (p.at("clientId") == a) EXPECT_FALSE(p.at("connected").get<bool>());
  }
  (void)t;
}
