#include "songsmith/service/http.hpp"

namespace songsmith {

using nlohmann::json;

namespace {

void send_error(httplib::Response& res, int status, const std::string& message, const json& field) {
  res.status = status;
  res.set_content(json{{"error", message}, {"field", field}}.dump(), "application/json");
}

template <typename F>
void guarded(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const ValidationError& e) {
    send_error(res, 400, e.what(), e.field());
  } catch (const CheckpointFault& e) {
    send_error(res, 500, e.what(), nullptr);
  } catch (const std::exception& e) {
    send_error(res, 500, e.what(), nullptr);
  }
}

}  // namespace

void register_routes(httplib::Server& server, StudioService& service) {
  server.Post("/generate", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      json body;
      try {
        body = json::parse(req.body);
      } catch (const json::exception&) {
        throw ValidationError("body", "request body is not valid JSON");
      }
      const GenerateResponse r = service.generate(GenerateRequest::from_json(body));
      res.set_content(r.to_json().dump(), "application/json");
    });
  });

  server.Get(R"(/generations/([0-9a-f]+)/midi)", [&service](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto r = service.find(req.matches[1]);
      if (!r) return send_error(res, 404, "unknown generation", "id");
      const auto bytes = service.midi(*r);
      res.set_content(std::string(bytes.begin(), bytes.end()), "audio/midi");
      res.set_header("Content-Disposition", "attachment; filename=\"" + r->id + ".mid\"");
    });
  });

  server.Get(R"(/generations/([0-9a-f]+)/pianoroll)",
             [&service](const httplib::Request& req, httplib::Response& res) {
               guarded(res, [&] {
                 const auto r = service.find(req.matches[1]);
                 if (!r) return send_error(res, 404, "unknown generation", "id");
                 res.set_content(service.pianoroll(*r).dump(), "application/json");
               });
             });

  server.Get("/checkpoints", [&service](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] { res.set_content(json{{"checkpoints", service.list_checkpoints()}}.dump(), "application/json"); });
  });

  server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(json{{"status", "ok"}}.dump(), "application/json");
  });
}

}  // namespace songsmith
