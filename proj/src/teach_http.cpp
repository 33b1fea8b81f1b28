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

#include "wac/teach_http.hpp"

#include <sstream>

#include "httplib.h"
#include "wac/error.hpp"
#include "wac/io.hpp"

namespace wac::teach {

using nlohmann::json;

json scene_to_json(const Scene& scene) {
  json objects = json::array();
  for (const auto& obj : scene.objects) {
    json attrs = json::object();
    for (const auto& [k, v] : obj.attributes) attrs[k] = v;
    objects.push_back({{"object_id", obj.id}, {"attributes", attrs}, {"features", obj.features}});
  }
  return {{"scene_id", scene.id}, {"objects", objects}};
}

Scene scene_from_json(const json& j) {
  Scene scene;
  scene.id = j.at("scene_id").get<std::string>();
  for (const auto& o : j.at("objects")) {
    SceneObject obj;
    obj.id = o.at("object_id").get<std::string>();
    obj.features = o.at("features").get<std::vector<double>>();
    if (o.contains("attributes")) {
      for (const auto& [k, v] : o.at("attributes").items()) {
        obj.attributes.emplace_back(k, v.get<std::string>());
      }
    }
    scene.objects.push_back(std::move(obj));
  }
  return scene;
}

json distribution_to_json(const ReferentDistribution& dist) {
  json entries = json::array();
  for (std::size_t i = 0; i < dist.size(); ++i) {
    entries.push_back({{"object_id", dist.object_ids[i]}, {"probability", dist.probs[i]}});
  }
  return entries;
}

ReferentDistribution distribution_from_json(const json& j) {
  ReferentDistribution dist;
  for (const auto& e : j) {
    dist.object_ids.push_back(e.at("object_id").get<std::string>());
    dist.probs.push_back(e.at("probability").get<double>());
  }
  return dist;
}

json log_entry_to_json(const LogEntry& entry) {
  return {{"index", entry.index},
          {"scene", scene_to_json(entry.scene)},
          {"tokens", entry.tokens},
          {"gold_object_id", entry.gold_id},
          {"frame_seed", entry.frame_seed},
          {"frames", entry.frames},
          {"jitter_sigma", entry.jitter_sigma},
          {"pre", distribution_to_json(entry.pre)},
          {"post", distribution_to_json(entry.post)},
          {"timestamp", entry.timestamp}};
}

LogEntry log_entry_from_json(const json& j) {
  LogEntry e;
  e.index = j.at("index").get<std::size_t>();
  e.scene = scene_from_json(j.at("scene"));
  e.tokens = j.at("tokens").get<std::vector<std::string>>();
  e.gold_id = j.at("gold_object_id").get<std::string>();
  e.frame_seed = j.at("frame_seed").get<std::uint64_t>();
  e.frames = j.at("frames").get<std::size_t>();
  e.jitter_sigma = j.at("jitter_sigma").get<double>();
  e.pre = distribution_from_json(j.at("pre"));
  e.post = distribution_from_json(j.at("post"));
  e.timestamp = j.at("timestamp").get<std::string>();
  return e;
}

std::string log_to_jsonl(const std::vector<LogEntry>& log) {
  std::string out;
  for (const auto& e : log) {
    out += log_entry_to_json(e).dump();
    out += '\n';
  }
  return out;
}

std::vector<LogEntry> log_from_jsonl(const std::string& text) {
  std::vector<LogEntry> log;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      log.push_back(log_entry_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(ErrorKind::Parse, lineno, "log", e.what());
    }
  }
  return log;
}

namespace {

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NotFound: return 404;
    case ErrorKind::InvalidArgument:
    case ErrorKind::Parse:
    case ErrorKind::NonFinite:
    case ErrorKind::Version:
    case ErrorKind::Truncated: return 422;
    case ErrorKind::Dimension:
    case ErrorKind::Internal: return 500;
  }
  return 500;
}

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump() + "\n", "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view kind,
                const std::string& message) {
  send_json(res, status, {{"error", {{"kind", kind}, {"message", message}}}});
}

template <typename Handler>
auto guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const Error& e) {
      send_error(res, status_for(e.kind()), to_string(e.kind()), e.what());
    } catch (const json::exception& e) {
      send_error(res, 400, "bad-request", e.what());
    } catch (const std::exception& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  return json::parse(req.body);
}

std::vector<std::string> tokens_of(const json& body) {
  if (!body.contains("tokens")) fail(ErrorKind::InvalidArgument, "missing 'tokens'");
  return body.at("tokens").get<std::vector<std::string>>();
}

}  // namespace

TeachHttpServer::TeachHttpServer(TeachService& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

TeachHttpServer::~TeachHttpServer() { stop(); }

void TeachHttpServer::install_routes() {
  auto& srv = *server_;
  const std::string sid = R"(/sessions/([A-Za-z0-9_-]+))";

  srv.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    const std::uint64_t seed = body.value("seed", std::uint64_t{7});
    auto spec = GenerativeSpec::preset(body.value("preset", std::string("color-shape")), seed);
    if (body.contains("noise_sigma")) spec.noise_sigma = body.at("noise_sigma").get<double>();
    TeachSettings settings;
    settings.objects_per_scene = body.value("objects_per_scene", settings.objects_per_scene);
    settings.frames = body.value("frames", settings.frames);
    std::optional<Lexicon> base;
    if (body.contains("lexicon")) {
      std::istringstream in(body.at("lexicon").get<std::string>());
      base = io::load_lexicon(in);
    }
    const auto id = service_.create_session(spec, seed, std::move(base), settings);
    send_json(res, 201, {{"session_id", id}, {"scene", scene_to_json(service_.scene(id))}});
  }));

  srv.Get(sid + "/scene", guarded([this](const httplib::Request& req, httplib::Response& res) {
    send_json(res, 200, {{"scene", scene_to_json(service_.scene(req.matches[1]))}});
  }));

  srv.Post(sid + "/preview", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto tokens = tokens_of(parse_body(req));
    const std::string id = req.matches[1];
    json prefixes = json::array();
    for (const auto& d : service_.preview_prefixes(id, tokens)) {
      prefixes.push_back(distribution_to_json(d));
    }
    send_json(res, 200,
              {{"tokens", tokens},
               {"distribution", distribution_to_json(service_.preview(id, tokens))},
               {"prefixes", prefixes}});
  }));

  srv.Post(sid + "/teach", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto body = parse_body(req);
    const auto tokens = tokens_of(body);
    if (!body.contains("gold_object_id")) {
      fail(ErrorKind::InvalidArgument, "missing 'gold_object_id'");
    }
    const auto entry = service_.teach(req.matches[1], tokens,
                                      body.at("gold_object_id").get<std::string>());
    send_json(res, 200, {{"entry", log_entry_to_json(entry)}});
  }));

  srv.Post(sid + "/next-scene",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
             send_json(res, 200, {{"scene", scene_to_json(service_.next_scene(req.matches[1]))}});
           }));

  srv.Get(sid + "/lexicon", guarded([this](const httplib::Request& req, httplib::Response& res) {
    std::ostringstream out;
    io::save_lexicon(out, service_.export_lexicon(req.matches[1]));
    res.status = 200;
    res.set_content(out.str(), "text/plain");
  }));

  srv.Get(sid + "/log", guarded([this](const httplib::Request& req, httplib::Response& res) {
    res.status = 200;
    res.set_content(log_to_jsonl(service_.log(req.matches[1])), "application/x-ndjson");
  }));
}

int TeachHttpServer::bind_any_port(const std::string& host) {
  return server_->bind_to_any_port(host);
}

bool TeachHttpServer::bind(const std::string& host, int port) {
  return server_->bind_to_port(host, port);
}

bool TeachHttpServer::listen_after_bind() { return server_->listen_after_bind(); }

void TeachHttpServer::stop() {
  if (server_ && server_->is_running()) server_->stop();
}

void TeachHttpServer::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace wac::teach
