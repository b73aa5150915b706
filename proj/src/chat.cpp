#include "socsim/chat.hpp"

#include <algorithm>

namespace socsim {

void to_json(Json& j, const ChatMessage& m) {
  j = Json{{"id", m.id},
           {"channel", m.channel},
           {"senderId", m.senderId},
           {"senderName", m.senderName},
           {"senderRole", m.senderRole},
           {"body", m.body},
           {"at", to_epoch_ms(m.at)}};
}

void from_json(const Json& j, ChatMessage& m) {
  m.id = j.at("id").get<std::uint64_t>();
  m.channel = j.at("channel").get<std::string>();
  m.senderId = j.at("senderId").get<std::string>();
  m.senderName = j.at("senderName").get<std::string>();
  m.senderRole = j.at("senderRole").get<Role>();
  m.body = j.at("body").get<std::string>();
  m.at = from_epoch_ms(j.at("at").get<std::int64_t>());
}

ChatLog::ChatLog(std::vector<std::string> regions) : regions_(std::move(regions)) {
  for (const auto& r : regions_) channels_[r];
  channels_[std::string(kInstructorChannel)];
  channels_[std::string(kBroadcastChannel)];
}

bool ChatLog::is_channel(std::string_view channel) const {
  return channels_.find(std::string(channel)) != channels_.end();
}

namespace {

bool is_member(const ClientSession& s, std::string_view channel) {
  if (s.role == Role::teacher) return true;
  return channel == kInstructorChannel || channel == kBroadcastChannel ||
         (s.region && *s.region == channel);
}

}  // namespace

std::string ChatLog::check_post(const ClientSession& sender, const std::string& channel,
                                std::string_view body) const {
  if (!is_channel(channel)) fail(ErrorCode::invalid, "unknown channel '" + channel + "'");
  if (channel == kBroadcastChannel && sender.role != Role::teacher) {
    fail(ErrorCode::forbidden, "only teachers may post to broadcast");
  }
  if (!is_member(sender, channel)) fail(ErrorCode::forbidden, "not a member of " + channel);
  std::string trimmed = trim(body);
  if (trimmed.empty()) fail(ErrorCode::invalid, "message body is empty");
  if (utf8_length(trimmed) > kMaxChatBody) fail(ErrorCode::invalid, "message body exceeds 1000 characters");
  return trimmed;
}

void ChatLog::append(ChatMessage message) {
  channels_[message.channel].push_back(std::move(message));
}

bool ChatLog::delivers_to(const ChatMessage& m, const ClientSession& reader) const {
  if (!is_member(reader, m.channel)) return false;
  if (reader.role == Role::teacher || m.channel != kInstructorChannel) return true;
  return m.senderId == reader.clientId || m.senderRole == Role::teacher;
}

std::vector<ChatMessage> ChatLog::history(const ClientSession& reader, const std::string& channel,
                                          std::size_t limit) const {
  if (!is_channel(channel) || !is_member(reader, channel)) {
    fail(ErrorCode::forbidden, "not a member of " + channel);
  }
  std::vector<ChatMessage> visible;
  for (const auto& m : channels_.at(channel)) {
    if (delivers_to(m, reader)) visible.push_back(m);
  }
  if (visible.size() > limit) {
    visible.erase(visible.begin(), visible.end() - static_cast<std::ptrdiff_t>(limit));
  }
  return visible;
}

std::vector<std::string> ChatLog::channels_for(const ClientSession& reader) const {
  std::vector<std::string> out;
  for (const auto& [name, _] : channels_) {
    if (is_member(reader, name)) out.push_back(name);
  }
  return out;
}

std::map<std::string, std::vector<ChatMessage>> ChatLog::histories_for(
    const ClientSession& reader) const {
  std::map<std::string, std::vector<ChatMessage>> out;
  for (const auto& name : channels_for(reader)) {
    out[name] = history(reader, name, static_cast<std::size_t>(-1));
  }
  return out;
}

}  // namespace socsim
