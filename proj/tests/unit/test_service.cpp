#include "songsmith/service/http.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include "oracles.hpp"

using namespace songsmith;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path checkpoint_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "songsmith_service";
    fs::remove_all(d);
    fs::create_directories(d / "ckpt");
    ToyCorpusConfig tc;
    tc.count = 30;
    tc.length = 8;
    auto all = make_toy_corpus(tc);
    save_checkpoint(d / "ckpt" / "toy.ckpt", oracle::tiny_bundle(all, all));
    return d;
  }();
  return dir;
}

// Runs a server on an ephemeral loopback port for the lifetime of the object.
struct LiveServer {
  StudioService service;
  httplib::Server server;
  std::thread thread;
  int port = 0;

  explicit LiveServer(ServiceConfig cfg) : service(std::move(cfg)) {
    register_routes(server, service);
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~LiveServer() {
    server.stop();
    thread.join();
  }
  httplib::Client client() const { return httplib::Client("127.0.0.1", port); }
};

ServiceConfig config() {
  ServiceConfig c;
  c.checkpoint_dir = checkpoint_dir() / "ckpt";
  c.cache_dir = checkpoint_dir() / "cache";
  return c;
}

}  // namespace

TEST_CASE("request validation names the field") {
  CHECK_NOTHROW(GenerateRequest::from_json({{"lyrics", "la la"}}));
  auto expect_field = [](const json& j, const std::string& field) {
    try {
      GenerateRequest::from_json(j);
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(e.field() == field);
    }
  };
  expect_field({{"lyrics", "la"}, {"controls", {{"pitch.avg", 1.3}}}}, "pitch.avg");
  expect_field({{"lyrics", "la"}, {"controls", {{"pitch.avg", -0.1}}}}, "pitch.avg");
  expect_field({{"lyrics", "la"}, {"controls", {{"pitch.loud", 0.1}}}}, "pitch.loud");
  expect_field({{"controls", json::object()}}, "lyrics");
  expect_field({{"lyrics", "la"}, {"seed", -4}}, "seed");
  auto r = GenerateRequest::from_json({{"lyrics", "la"}, {"controls", {{"rest.var", 0.0}, {"duration.avg", 1.0}}}, {"seed", 3}});
  CHECK(r.controls.get(Attribute::kRest, StyleFeature::kVariance) == 0.0);
  CHECK(r.controls.get(Attribute::kDuration, StyleFeature::kAverage) == 1.0);
  CHECK(r.controls.get(Attribute::kPitch, StyleFeature::kAverage) == 0.5);
  CHECK(GenerateRequest::from_json(r.to_json()).to_json() == r.to_json());
}

TEST_CASE("piano-roll geometry") {
  MelodySequence m{{{60, 1.0, 0.5}, {62, 2.0, 0.0}, {55, 0.5, 1.0}}};
  auto l = tokenize_lyrics("one two three");
  auto roll = pianoroll_json(m, l, 100.0);
  REQUIRE(roll["notes"].size() == 3);
  CHECK(roll["notes"][0]["onset"] == 0.0);
  CHECK(roll["notes"][1]["onset"] == 1.5);
  CHECK(roll["notes"][1]["offset"] == 3.5);
  CHECK(roll["notes"][2]["onset"] == 3.5);
  CHECK(roll["notes"][2]["syllable"] == "three");
  CHECK(roll["total_length"] == 5.0);
  CHECK(roll["pitch_min"] == 55);
  CHECK(roll["pitch_max"] == 62);
  CHECK(roll["tempo_bpm"] == 100.0);
}

TEST_CASE("service generates deterministic melodies for a fixed seed") {
  StudioService s(config());
  GenerateRequest req;
  req.lyrics = "ba-da ki lo-mi-na";
  req.seed = 42;
  auto a = s.generate(req), b = s.generate(req);
  CHECK(a.melody == b.melody);
  CHECK(a.id == b.id);
  CHECK(a.melody.size() == 6);
  CHECK(a.request.checkpoint == "toy");
  req.seed = 43;
  CHECK(s.generate(req).id != a.id);

  GenerateRequest no_seed;
  no_seed.lyrics = "la la";
  auto r = s.generate(no_seed);
  REQUIRE(r.request.seed.has_value());
  no_seed.seed = r.request.seed;
  CHECK(s.generate(no_seed).melody == r.melody);

  // persisted generations survive a restart
  StudioService fresh(config());
  auto found = fresh.find(a.id);
  REQUIRE(found.has_value());
  CHECK(found->melody == a.melody);
  CHECK(GenerateResponse::from_json(a.to_json()).to_json() == a.to_json());
}

TEST_CASE("HTTP endpoints") {
  LiveServer live(config());
  auto cli = live.client();

  auto health = cli.Get("/health");
  REQUIRE(health);
  CHECK(health->status == 200);

  json body = {{"lyrics", "ba-da ki lo-mi-na su"}, {"controls", {{"pitch.avg", 0.9}}}, {"seed", 7}};
  auto res = cli.Post("/generate", body.dump(), "application/json");
  REQUIRE(res);
  REQUIRE(res->status == 200);
  auto j = json::parse(res->body);
  CHECK(j["notes"].size() == 7);
  CHECK(j["request"]["controls"]["pitch.avg"] == 0.9);
  CHECK(j["request"]["seed"] == 7);
  const std::string id = j["id"];

  auto again = cli.Post("/generate", body.dump(), "application/json");
  CHECK(json::parse(again->body)["notes"] == j["notes"]);

  auto midi = cli.Get("/generations/" + id + "/midi");
  REQUIRE(midi);
  CHECK(midi->status == 200);
  CHECK(midi->get_header_value("Content-Type") == "audio/midi");
  std::vector<std::uint8_t> bytes(midi->body.begin(), midi->body.end());
  auto melody = midi_to_melody(bytes);
  CHECK(melody.size() == 7);
  for (std::size_t i = 0; i < 7; ++i) CHECK(melody.notes[i].pitch == j["notes"][i][0]);

  auto roll = cli.Get("/generations/" + id + "/pianoroll");
  REQUIRE(roll);
  auto rj = json::parse(roll->body);
  CHECK(rj["notes"].size() == 7);
  CHECK(rj["id"] == id);
  double onset = 0;
  for (std::size_t i = 0; i < 7; ++i) {
    CHECK(rj["notes"][i]["onset"].get<double>() == doctest::Approx(onset));
    onset += j["notes"][i][1].get<double>() + j["notes"][i][2].get<double>();
  }

  auto bad = cli.Post("/generate", json{{"lyrics", "la"}, {"controls", {{"pitch.avg", 1.3}}}}.dump(), "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  CHECK(json::parse(bad->body)["field"] == "pitch.avg");
  auto junk = cli.Post("/generate", "{not json", "application/json");
  CHECK(junk->status == 400);
  auto unknown_ckpt = cli.Post("/generate", json{{"lyrics", "la"}, {"checkpoint", "nope"}}.dump(), "application/json");
  CHECK(unknown_ckpt->status == 400);
  CHECK(json::parse(unknown_ckpt->body)["field"] == "checkpoint");

  CHECK(cli.Get("/generations/0123abcd/midi")->status == 404);

  auto list = cli.Get("/checkpoints");
  REQUIRE(list);
  auto lj = json::parse(list->body)["checkpoints"];
  REQUIRE(lj.size() == 1);
  CHECK(lj[0]["id"] == "toy");
  CHECK(lj[0]["ok"] == true);
}

TEST_CASE("corrupt checkpoints surface as server errors") {
  auto dir = checkpoint_dir() / "broken";
  fs::create_directories(dir);
  std::ofstream(dir / "bad.ckpt") << "not a checkpoint";
  ServiceConfig c;
  c.checkpoint_dir = dir;
  LiveServer live(c);
  auto cli = live.client();
  auto res = cli.Post("/generate", json{{"lyrics", "la la"}, {"checkpoint", "bad"}}.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 500);
  auto list = json::parse(cli.Get("/checkpoints")->body)["checkpoints"];
  CHECK(list[0]["ok"] == false);
}
