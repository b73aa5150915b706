#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "socsim/session.hpp"
#include "socsim/types.hpp"

namespace socsim {

inline constexpr std::string_view kInstructorChannel = "instructor";
inline constexpr std::string_view kBroadcastChannel = "broadcast";
inline constexpr std::size_t kMaxChatBody = 1000;

struct ChatMessage {
  std::uint64_t id = 0;  // audit seq of the chat entry
  std::string channel;
  ClientId senderId;
  std::string senderName;
  Role senderRole = Role::student;
  std::string body;
  Timestamp at{};

  bool operator==(const ChatMessage&) const = default;
};

void to_json(Json& j, const ChatMessage& m);
void from_json(const Json& j, ChatMessage& m);

// Channels are the configured regions plus "instructor" and "broadcast".
//
// Membership:
//   region      students of that region, all teachers
//   instructor  teachers see everything; a student sees what they sent and
//               what teachers posted there
//   broadcast   everyone reads, only teachers post
class ChatLog {
 public:
  explicit ChatLog(std::vector<std::string> regions);

  bool is_channel(std::string_view channel) const;

  // Throws forbidden/invalid; returns the trimmed body to store.
  std::string check_post(const ClientSession& sender, const std::string& channel,
                         std::string_view body) const;

  void append(ChatMessage message);

  bool delivers_to(const ChatMessage& message, const ClientSession& reader) const;

  // Last `limit` messages of `channel` visible to `reader`, id ascending.
  // Throws forbidden when the reader is not a member.
  std::vector<ChatMessage> history(const ClientSession& reader, const std::string& channel,
                                   std::size_t limit) const;

  // Every channel the reader belongs to, with its full visible history.
  std::map<std::string, std::vector<ChatMessage>> histories_for(const ClientSession& reader) const;

  std::vector<std::string> channels_for(const ClientSession& reader) const;
  const std::map<std::string, std::vector<ChatMessage>>& all() const { return channels_; }

 private:
  std::vector<std::string> regions_;
  std::map<std::string, std::vector<ChatMessage>> channels_;
};

}  // namespace socsim
