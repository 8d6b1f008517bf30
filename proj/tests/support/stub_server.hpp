#pragma once

// In-process HTTP server speaking the chat-completions and embeddings wire
// format, answering from mock tables, with scripted faults and counters.

#include <atomic>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "masr/backends/mock.hpp"

namespace httplib {
class Server;
}

namespace masr::testing {

struct Fault {
  int status = 200;
  std::string body;  // raw response body; empty: normal reply with this status
  int delay_ms = 0;
};

class StubServer {
 public:
  explicit StubServer(std::shared_ptr<const MockTables> tables = std::make_shared<MockTables>());
  ~StubServer();
  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  std::string endpoint() const;  // http://127.0.0.1:<port>/v1

  // Faults are consumed one per request, in order, for the given route
  // ("/chat/completions" or "/embeddings").
  void push_fault(const std::string& route, Fault fault);
  // Overrides the reply text for non-caption chat requests.
  void set_chat_reply(std::function<std::string(const nlohmann::json& request)> reply);

  int requests(const std::string& route) const;
  int chat_calls() const { return chat_calls_.load(); }        // answering / selection
  int caption_calls() const { return caption_calls_.load(); }
  int embed_calls() const { return embed_calls_.load(); }      // requests to /embeddings
  int embed_inputs() const { return embed_inputs_.load(); }
  std::vector<std::string> authorization_headers() const;
  nlohmann::json last_request(const std::string& route) const;
  void reset_counters();

 private:
  std::string handle_chat(const nlohmann::json& request);
  nlohmann::json handle_embeddings(const nlohmann::json& request);

  std::shared_ptr<const MockTables> tables_;
  MockReflector reflector_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;

  mutable std::mutex mu_;
  std::map<std::string, std::deque<Fault>> faults_;
  std::map<std::string, int> requests_;
  std::map<std::string, nlohmann::json> last_;
  std::vector<std::string> auth_;
  std::function<std::string(const nlohmann::json&)> chat_reply_;
  std::atomic<int> chat_calls_{0};
  std::atomic<int> caption_calls_{0};
  std::atomic<int> embed_calls_{0};
  std::atomic<int> embed_inputs_{0};
};

}  // namespace masr::testing
