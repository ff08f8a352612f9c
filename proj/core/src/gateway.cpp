#include "newscap/gateway.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <istream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <ostream>
#include <unordered_set>

#include "newscap/error.hpp"
#include "newscap/segmenter.hpp"
#include "newscap/text.hpp"

namespace newscap {
namespace {

using nlohmann::json;

std::string_view payload_field(ModelTask task) {
  return task == ModelTask::kSentSelect ? "sentence" : "context";
}

std::string_view answer_field(ModelTask task) {
  switch (task) {
    case ModelTask::kSentSelect: return "answer";
    case ModelTask::kEntSelect: return "entities";
    case ModelTask::kCaption: return "caption";
  }
  return "";
}

json parse_object(std::string_view line, std::string_view what) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw ProtocolError("malformed " + std::string(what) + ": " + e.what());
  }
  if (!j.is_object()) {
    throw ProtocolError(std::string(what) + " is not a JSON object");
  }
  return j;
}

std::string require_string(const json& j, std::string_view key,
                           std::string_view what) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw ProtocolError(std::string(what) + " lacks field " + std::string(key));
  }
  if (!it->is_string()) {
    throw ProtocolError(std::string(what) + " field " + std::string(key) +
                        " is not a string");
  }
  return it->get<std::string>();
}

void reject_extra_fields(const json& j, std::initializer_list<std::string_view> allowed,
                         std::string_view what) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ProtocolError(std::string(what) + " has unexpected field " + key);
  }
}

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

void write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("endpoint write failed: ") + std::strerror(errno));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

// Reads one '\n'-terminated line from `fd`, keeping any surplus in `pending`.
std::string read_line(int fd, std::string& pending, std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    if (auto nl = pending.find('\n'); nl != std::string::npos) {
      std::string line = pending.substr(0, nl);
      pending.erase(0, nl + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      throw TimeoutError("no response within " + std::to_string(timeout.count()) + " ms");
    }
    pollfd p{fd, POLLIN, 0};
    const int r = ::poll(&p, 1, static_cast<int>(left.count()));
    if (r < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("poll failed: ") + std::strerror(errno));
    }
    if (r == 0) continue;
    char buf[4096];
    const ssize_t n = ::read(fd, buf, sizeof buf);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("endpoint read failed: ") + std::strerror(errno));
    }
    if (n == 0) throw ProtocolError("endpoint closed the connection");
    pending.append(buf, static_cast<std::size_t>(n));
  }
}

}  // namespace

std::string_view to_string(ModelTask task) {
  switch (task) {
    case ModelTask::kSentSelect: return "sent_select";
    case ModelTask::kEntSelect: return "ent_select";
    case ModelTask::kCaption: return "caption";
  }
  return "unknown";
}

ModelTask parse_model_task(std::string_view s) {
  if (s == "sent_select") return ModelTask::kSentSelect;
  if (s == "ent_select") return ModelTask::kEntSelect;
  if (s == "caption") return ModelTask::kCaption;
  throw ProtocolError("unknown task '" + std::string(s) + "'");
}

std::string encode_request(const ModelRequest& req) {
  json j = json::object();
  j["request_id"] = req.request_id;
  j["task"] = to_string(req.task);
  j["image_ref"] = req.image_ref;
  j[std::string(payload_field(req.task))] = req.payload;
  return j.dump();
}

std::string encode_response(const ModelResponse& resp) {
  json j = json::object();
  j["request_id"] = resp.request_id;
  switch (resp.task) {
    case ModelTask::kSentSelect: j["answer"] = resp.answer ? "yes" : "no"; break;
    case ModelTask::kEntSelect: j["entities"] = resp.entities; break;
    case ModelTask::kCaption: j["caption"] = resp.caption; break;
  }
  return j.dump();
}

ModelRequest decode_request(std::string_view line) {
  const json j = parse_object(line, "request");
  ModelRequest req;
  req.request_id = require_string(j, "request_id", "request");
  req.task = parse_model_task(require_string(j, "task", "request"));
  req.image_ref = require_string(j, "image_ref", "request");
  const std::string_view field = payload_field(req.task);
  req.payload = require_string(j, field, "request");
  reject_extra_fields(j, {"request_id", "task", "image_ref", field}, "request");
  return req;
}

ModelResponse decode_response(std::string_view line, const ModelRequest& req) {
  const json j = parse_object(line, "response");
  if (auto err = j.find("error"); err != j.end()) {
    throw ProtocolError("model reported an error: " +
                        (err->is_string() ? err->get<std::string>() : err->dump()));
  }
  ModelResponse resp;
  resp.task = req.task;
  resp.request_id = require_string(j, "request_id", "response");
  if (resp.request_id != req.request_id) {
    throw ProtocolError("request_id mismatch: sent " + req.request_id + ", got " +
                        resp.request_id);
  }
  const std::string_view field = answer_field(req.task);
  reject_extra_fields(j, {"request_id", field}, "response");
  switch (req.task) {
    case ModelTask::kSentSelect: {
      const std::string a = require_string(j, field, "response");
      if (a != "yes" && a != "no") {
        throw ProtocolError("answer '" + a + "' outside {yes, no}");
      }
      resp.answer = a == "yes";
      break;
    }
    case ModelTask::kEntSelect: {
      auto it = j.find(field);
      if (it == j.end() || !it->is_array()) {
        throw ProtocolError("response lacks an entities array");
      }
      for (const auto& e : *it) {
        if (!e.is_string()) throw ProtocolError("entity list holds a non-string");
        resp.entities.push_back(e.get<std::string>());
      }
      break;
    }
    case ModelTask::kCaption:
      resp.caption = require_string(j, field, "response");
      break;
  }
  return resp;
}

ModelResponse LineEndpoint::query(const ModelRequest& req) {
  const std::string reply = exchange(encode_request(req));
  return decode_response(reply, req);
}

std::string LoopbackEndpoint::exchange(const std::string& line) {
  return handler_(line);
}

SubprocessEndpoint::SubprocessEndpoint(const std::string& command,
                                       std::chrono::milliseconds timeout)
    : timeout_(timeout) {
  ignore_sigpipe();
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe(in_pipe) != 0) throw IoError("pipe failed");
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw IoError("pipe failed");
  }
  pid_ = ::fork();
  if (pid_ < 0) throw IoError("fork failed");
  if (pid_ == 0) {
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    ::close(out_pipe[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  ::fcntl(to_child_, F_SETFD, FD_CLOEXEC);
  ::fcntl(from_child_, F_SETFD, FD_CLOEXEC);
}

SubprocessEndpoint::~SubprocessEndpoint() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  if (pid_ > 0) {
    int status = 0;
    // Give the child a moment to exit on EOF before forcing it.
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) == pid_) return;
      ::usleep(10000);
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
  }
}

std::string SubprocessEndpoint::exchange(const std::string& line) {
  write_all(to_child_, line + "\n");
  return read_line(from_child_, pending_, timeout_);
}

UnixSocketEndpoint::UnixSocketEndpoint(const std::filesystem::path& socket_path,
                                       std::chrono::milliseconds timeout)
    : timeout_(timeout) {
  ignore_sigpipe();
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  const std::string p = socket_path.string();
  if (p.size() >= sizeof addr.sun_path) throw InvalidArgument("socket path too long: " + p);
  std::memcpy(addr.sun_path, p.c_str(), p.size() + 1);
  fd_ = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd_ < 0) throw IoError("socket failed");
  if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    const std::string reason = std::strerror(errno);
    ::close(fd_);
    fd_ = -1;
    throw IoError("cannot connect to " + p + ": " + reason);
  }
}

UnixSocketEndpoint::~UnixSocketEndpoint() {
  if (fd_ >= 0) ::close(fd_);
}

std::string UnixSocketEndpoint::exchange(const std::string& line) {
  write_all(fd_, line + "\n");
  return read_line(fd_, pending_, timeout_);
}

std::size_t serve_stream(std::istream& in, std::ostream& out,
                         const LineHandler& handler) {
  std::size_t served = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (text::word_count(line) == 0) continue;
    out << handler(line) << '\n' << std::flush;
    ++served;
  }
  return served;
}

UnixSocketServer::UnixSocketServer(std::filesystem::path socket_path,
                                   LineHandler handler)
    : path_(std::move(socket_path)), handler_(std::move(handler)) {
  ignore_sigpipe();
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  const std::string p = path_.string();
  if (p.size() >= sizeof addr.sun_path) throw InvalidArgument("socket path too long: " + p);
  std::memcpy(addr.sun_path, p.c_str(), p.size() + 1);
  ::unlink(p.c_str());
  listen_fd_ = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (listen_fd_ < 0) throw IoError("socket failed");
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(listen_fd_, 16) != 0) {
    const std::string reason = std::strerror(errno);
    ::close(listen_fd_);
    throw IoError("cannot listen on " + p + ": " + reason);
  }
}

UnixSocketServer::~UnixSocketServer() {
  stop();
  ::close(listen_fd_);
  ::unlink(path_.c_str());
}

void UnixSocketServer::serve() {
  std::vector<std::thread> connections;
  while (!stopping_) {
    pollfd p{listen_fd_, POLLIN, 0};
    if (::poll(&p, 1, 50) <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    connections.emplace_back([this, fd] {
      std::string pending;
      try {
        while (!stopping_) {
          std::string line;
          try {
            line = read_line(fd, pending, std::chrono::milliseconds(100));
          } catch (const TimeoutError&) {
            continue;
          }
          write_all(fd, handler_(line) + "\n");
        }
      } catch (const Error&) {
        // Peer closed or broke the connection.
      }
      ::close(fd);
    });
  }
  for (auto& t : connections) t.join();
}

void UnixSocketServer::start() {
  background_ = std::thread([this] { serve(); });
}

void UnixSocketServer::stop() {
  stopping_ = true;
  if (background_.joinable()) background_.join();
}

MockModel::MockModel(std::shared_ptr<const Tagger> tagger,
                     std::unordered_map<std::string, std::string> captions_by_image)
    : tagger_(std::move(tagger)) {
  for (const auto& [image, caption] : captions_by_image) {
    auto& set = caption_surfaces_[image];
    for (const auto& e : tagger_->tag(caption, {image, TextField::kCaption})) {
      set.insert(e.surface);
    }
  }
}

MockModel MockModel::from_corpus(std::shared_ptr<const Tagger> tagger,
                                 const Corpus& corpus) {
  std::unordered_map<std::string, std::string> captions;
  for (const auto& d : corpus.documents()) captions.emplace(d.image_ref, d.caption);
  return MockModel(std::move(tagger), std::move(captions));
}

ModelResponse MockModel::respond(const ModelRequest& req) const {
  ModelResponse resp;
  resp.request_id = req.request_id;
  resp.task = req.task;
  switch (req.task) {
    case ModelTask::kSentSelect: {
      auto it = caption_surfaces_.find(req.image_ref);
      if (it == caption_surfaces_.end()) break;
      for (const auto& e : tagger_->tag(req.payload, {req.image_ref, TextField::kArticle})) {
        if (it->second.contains(e.surface)) {
          resp.answer = true;
          break;
        }
      }
      break;
    }
    case ModelTask::kEntSelect:
      resp.entities = unique_surfaces(
          tagger_->tag(req.payload, {req.image_ref, TextField::kArticle}));
      break;
    case ModelTask::kCaption: {
      const auto sentences = segment_sentences(req.payload);
      if (!sentences.empty()) {
        resp.caption = text::first_words(sentences.front().text, kCaptionWords);
      }
      break;
    }
  }
  return resp;
}

std::string MockModel::handle_line(std::string_view line) const {
  ModelRequest req;
  try {
    req = decode_request(line);
  } catch (const ProtocolError& e) {
    json j = json::object();
    try {
      const json probe = json::parse(line);
      if (probe.is_object() && probe.contains("request_id") &&
          probe["request_id"].is_string()) {
        j["request_id"] = probe["request_id"];
      }
    } catch (const json::exception&) {
    }
    j["error"] = e.what();
    return j.dump();
  }
  return encode_response(respond(req));
}

LineHandler MockModel::line_handler() const {
  return [this](std::string_view line) { return handle_line(line); };
}

std::string serialize_trace_event(const TraceEvent& ev) {
  json j = json::object();
  j["ts_ms"] = ev.ts_ms;
  j["doc_id"] = ev.doc_id;
  j["direction"] = ev.is_request ? "request" : "response";
  j["record"] = json::parse(ev.record);
  return j.dump();
}

TraceEvent parse_trace_event(std::string_view line) {
  try {
    const json j = json::parse(line);
    TraceEvent ev;
    ev.ts_ms = j.at("ts_ms").get<std::int64_t>();
    ev.doc_id = j.at("doc_id").get<std::string>();
    const auto dir = j.at("direction").get<std::string>();
    if (dir != "request" && dir != "response") {
      throw SchemaError("trace direction must be request or response, got " + dir);
    }
    ev.is_request = dir == "request";
    ev.record = j.at("record").dump();
    return ev;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed trace event: ") + e.what());
  }
}

ReplayEndpoint::ReplayEndpoint(std::span<const TraceEvent> events) {
  auto map = std::make_shared<std::unordered_map<std::string, Exchange>>();
  for (const auto& ev : events) {
    const json rec = json::parse(ev.record);
    const std::string id = rec.value("request_id", "");
    if (id.empty()) continue;
    auto& slot = (*map)[id];
    (ev.is_request ? slot.request : slot.response) = ev.record;
  }
  exchanges_ = std::move(map);
}

ReplayEndpoint ReplayEndpoint::load(const std::filesystem::path& trace_path) {
  std::ifstream in(trace_path);
  if (!in) throw IoError("cannot open trace " + trace_path.string());
  std::vector<TraceEvent> events;
  std::string line;
  while (std::getline(in, line)) {
    if (text::word_count(line) == 0) continue;
    events.push_back(parse_trace_event(line));
  }
  return ReplayEndpoint(events);
}

ModelResponse ReplayEndpoint::query(const ModelRequest& req) {
  auto it = exchanges_->find(req.request_id);
  if (it == exchanges_->end() || it->second.response.empty()) {
    throw ProtocolError("trace has no response for request " + req.request_id);
  }
  if (it->second.request != encode_request(req)) {
    throw ProtocolError("request " + req.request_id + " differs from the recorded one");
  }
  return decode_response(it->second.response, req);
}

}  // namespace newscap
