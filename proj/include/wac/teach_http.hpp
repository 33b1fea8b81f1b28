// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// HTTP/JSON front end for TeachService. Endpoints and payloads are listed
// in docs/teach-api.md.

#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "wac/teach.hpp"

namespace httplib {
class Server;
}

namespace wac::teach {

nlohmann::json scene_to_json(const Scene& scene);
Scene scene_from_json(const nlohmann::json& j);
nlohmann::json distribution_to_json(const ReferentDistribution& dist);
ReferentDistribution distribution_from_json(const nlohmann::json& j);
nlohmann::json log_entry_to_json(const LogEntry& entry);
LogEntry log_entry_from_json(const nlohmann::json& j);

/// One JSON object per line.
std::string log_to_jsonl(const std::vector<LogEntry>& log);
std::vector<LogEntry> log_from_jsonl(const std::string& text);

class TeachHttpServer {
 public:
  explicit TeachHttpServer(TeachService& service);
  ~TeachHttpServer();
  TeachHttpServer(const TeachHttpServer&) = delete;
  TeachHttpServer& operator=(const TeachHttpServer&) = delete;

  /// Binds an ephemeral port and returns it.
  int bind_any_port(const std::string& host = "127.0.0.1");
  bool bind(const std::string& host, int port);
  /// Blocks serving requests until stop().
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  void install_routes();

  TeachService& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace wac::teach
