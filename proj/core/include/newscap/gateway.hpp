#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include "newscap/corpus.hpp"
#include "newscap/ner.hpp"

// Line-delimited JSON protocol to an external captioning model, the
// transports that carry it, and a deterministic mock model.
namespace newscap {

enum class ModelTask { kSentSelect, kEntSelect, kCaption };

std::string_view to_string(ModelTask task);
// Throws ProtocolError on an unknown task name.
ModelTask parse_model_task(std::string_view s);

// Wire fields: request_id, task, image_ref, and "sentence" (sent_select) or
// "context" (ent_select, caption) holding `payload`.
struct ModelRequest {
  std::string request_id;
  ModelTask task = ModelTask::kCaption;
  std::string image_ref;
  std::string payload;

  friend bool operator==(const ModelRequest&, const ModelRequest&) = default;
};

// Wire fields: request_id plus "answer" ("yes"|"no"), "entities" or
// "caption" according to the task.
struct ModelResponse {
  std::string request_id;
  ModelTask task = ModelTask::kCaption;
  bool answer = false;
  std::vector<std::string> entities;
  std::string caption;

  friend bool operator==(const ModelResponse&, const ModelResponse&) = default;
};

std::string encode_request(const ModelRequest& req);
std::string encode_response(const ModelResponse& resp);
// Strict decoding: unknown or missing fields, wrong types and values
// outside the answer domain all throw ProtocolError.
ModelRequest decode_request(std::string_view line);
// Also checks the echo of `req.request_id`. A response carrying an "error"
// field is reported as a ProtocolError with that message.
ModelResponse decode_response(std::string_view line, const ModelRequest& req);

inline constexpr std::chrono::milliseconds kDefaultRequestTimeout{60000};

class ModelEndpoint {
 public:
  virtual ~ModelEndpoint() = default;
  virtual ModelResponse query(const ModelRequest& req) = 0;
};

using EndpointFactory = std::function<std::unique_ptr<ModelEndpoint>()>;

// Any handler mapping one request line to one response line.
using LineHandler = std::function<std::string(std::string_view)>;

// Serializes every exchange through the line protocol.
class LineEndpoint : public ModelEndpoint {
 public:
  ModelResponse query(const ModelRequest& req) override;

 protected:
  virtual std::string exchange(const std::string& line) = 0;
};

// Calls a handler in-process, still going through encode/decode.
class LoopbackEndpoint final : public LineEndpoint {
 public:
  explicit LoopbackEndpoint(LineHandler handler) : handler_(std::move(handler)) {}

 protected:
  std::string exchange(const std::string& line) override;

 private:
  LineHandler handler_;
};

// Runs `command` under /bin/sh and talks over its standard streams. A
// response not arriving within `timeout` raises TimeoutError.
class SubprocessEndpoint final : public LineEndpoint {
 public:
  SubprocessEndpoint(const std::string& command,
                     std::chrono::milliseconds timeout = kDefaultRequestTimeout);
  ~SubprocessEndpoint() override;
  SubprocessEndpoint(const SubprocessEndpoint&) = delete;
  SubprocessEndpoint& operator=(const SubprocessEndpoint&) = delete;

 protected:
  std::string exchange(const std::string& line) override;

 private:
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::chrono::milliseconds timeout_;
  std::string pending_;
};

// One persistent connection to a Unix domain socket server.
class UnixSocketEndpoint final : public LineEndpoint {
 public:
  UnixSocketEndpoint(const std::filesystem::path& socket_path,
                     std::chrono::milliseconds timeout = kDefaultRequestTimeout);
  ~UnixSocketEndpoint() override;
  UnixSocketEndpoint(const UnixSocketEndpoint&) = delete;
  UnixSocketEndpoint& operator=(const UnixSocketEndpoint&) = delete;

 protected:
  std::string exchange(const std::string& line) override;

 private:
  int fd_ = -1;
  std::chrono::milliseconds timeout_;
  std::string pending_;
};

// Answers each request line on `in` with one response line on `out` until
// end of input. Returns the number of requests served.
std::size_t serve_stream(std::istream& in, std::ostream& out,
                         const LineHandler& handler);

// Accepts connections on a Unix domain socket, one thread per connection.
class UnixSocketServer {
 public:
  UnixSocketServer(std::filesystem::path socket_path, LineHandler handler);
  ~UnixSocketServer();
  UnixSocketServer(const UnixSocketServer&) = delete;
  UnixSocketServer& operator=(const UnixSocketServer&) = delete;

  // Blocks until stop() is called.
  void serve();
  void start();  // serve() on a background thread
  void stop();

 private:
  std::filesystem::path path_;
  LineHandler handler_;
  int listen_fd_ = -1;
  std::atomic<bool> stopping_{false};
  std::thread background_;
};

// Deterministic stand-in for the aligned model. It knows each image's
// reference caption and answers:
//   sent_select: "yes" iff the sentence shares a tagged entity surface with
//                the caption of `image_ref`;
//   ent_select:  distinct tagged surfaces of the context, in order;
//   caption:     the first sentence of the context cut to 18 words.
class MockModel {
 public:
  static constexpr std::size_t kCaptionWords = 18;

  MockModel(std::shared_ptr<const Tagger> tagger,
            std::unordered_map<std::string, std::string> captions_by_image);
  static MockModel from_corpus(std::shared_ptr<const Tagger> tagger,
                               const Corpus& corpus);

  ModelResponse respond(const ModelRequest& req) const;
  // Protocol-level handler. Undecodable requests get {"error": ...}.
  std::string handle_line(std::string_view line) const;
  LineHandler line_handler() const;

 private:
  std::shared_ptr<const Tagger> tagger_;
  std::unordered_map<std::string, std::set<std::string>> caption_surfaces_;
};

// A recorded trace line: {"ts_ms", "doc_id", "direction": "request" |
// "response", "record": {...}}.
struct TraceEvent {
  std::int64_t ts_ms = 0;
  std::string doc_id;
  bool is_request = true;
  std::string record;  // encoded request or response line

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

std::string serialize_trace_event(const TraceEvent& ev);
TraceEvent parse_trace_event(std::string_view line);

// Answers requests from a recorded trace. A request that differs from the
// recorded one, or has no recorded response, raises ProtocolError.
class ReplayEndpoint final : public ModelEndpoint {
 public:
  explicit ReplayEndpoint(std::span<const TraceEvent> events);
  static ReplayEndpoint load(const std::filesystem::path& trace_path);

  ModelResponse query(const ModelRequest& req) override;

 private:
  struct Exchange {
    std::string request;
    std::string response;
  };
  std::shared_ptr<const std::unordered_map<std::string, Exchange>> exchanges_;
};

}  // namespace newscap
