#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <string>
#include <thread>

#include "support/cli.hpp"
#include "support/synth.hpp"

using testing::run_cli;
using testing::TempDir;
namespace fs = std::filesystem;

namespace {

// ingest -> gen-tasks -> split -> plan, run from `root` with relative paths.
void pipeline(const fs::path& root, const std::string& seed) {
  fs::create_directories(root);
  testing::spit(root / "raw.jsonl", testing::synth_corpus_jsonl(11, 60));
  REQUIRE(run_cli({"--seed", seed, "--out", "c", "ingest", "raw.jsonl"}, root).status == 0);
  REQUIRE(run_cli({"--seed", seed, "--out", "t", "gen-tasks", "--corpus", "c/corpus.jsonl"}, root).status == 0);
  testing::spit(root / "qa.jsonl", testing::qa_for_corpus(root / "c" / "corpus.jsonl", 3));
  auto s = run_cli({"--seed", seed, "--out", "s", "split", "--corpus", "c/corpus.jsonl", "--qa", "qa.jsonl", "--tasks",
                    "t/all_self_teaching.jsonl", "--reading", "t/all_reading_doc.jsonl"},
                   root);
  REQUIRE_MESSAGE(s.status == 0, s.err);
  auto p = run_cli({"--seed", seed, "--out", "p", "plan", "--preset", "pit", "--manifests", "s", "--render"}, root);
  REQUIRE_MESSAGE(p.status == 0, p.err);
}

struct MockChat {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> hits{0};
  std::atomic<int> unauthorized{0};
  int status = 200;
  std::string forced_body;

  MockChat() {
    server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits;
      if (req.get_header_value("Authorization") != "Bearer sekrit") ++unauthorized;
      auto body = absorb::Json::parse(req.body);
      std::string prompt = body["messages"].back()["content"];
      std::string reply;
      if (!forced_body.empty()) {
        res.status = status;
        res.set_content(forced_body, "application/json");
        return;
      }
      if (prompt.find("impossible to say") != std::string::npos) {
        reply = " Based on the paragraph above can we conclude that it is true?\nOptions: -Yes; -It's impossible to say; -No\n"
                "Answer: Yes\nQuestion: Based on the paragraph above can we conclude that it is false?\nAnswer: No\n";
      } else {
        reply = " Who is described?\nAnswer: A person\n\nQuestion: When?\nAnswer: Long ago\n";
      }
      absorb::Json j = {{"choices", {{{"message", {{"role", "assistant"}, {"content", reply}}}, {"finish_reason", "stop"}}}},
                        {"usage", {{"prompt_tokens", 10}, {"completion_tokens", 5}}}};
      res.status = status;
      res.set_content(j.dump(), "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~MockChat() {
    server.stop();
    thread.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions"; }
};

}  // namespace

TEST_CASE("usage errors exit 1") {
  CHECK(run_cli({"--version"}).status == 0);
  CHECK(run_cli({}).status == 1);
  CHECK(run_cli({"frobnicate"}).status == 1);
  CHECK(run_cli({"ingest"}).status == 1);
  CHECK(run_cli({"ingest", "/definitely/not/here.jsonl"}).status == 1);
  CHECK(run_cli({"gen-tasks"}).status == 1);
  CHECK(run_cli({"gen-tasks", "--corpus", "x", "--split", "dev"}).status == 1);
  CHECK(run_cli({"eval", "--judge", "oracle"}).status == 1);
  TempDir dir("cli-usage");
  auto r = run_cli({"--out", dir.path().string(), "plan"});
  CHECK(r.status == 1);
  CHECK(r.err.find("--preset") != std::string::npos);
  CHECK(run_cli({"--out", dir.path().string(), "plan", "--preset", "nonsense"}).status == 1);
}

TEST_CASE("data and io errors exit 2 and 3") {
  TempDir dir("cli-errors");
  testing::spit(dir / "bad.jsonl", "{\"title\":\"T\",\"body\":\"B.\"}\nnot json\n");
  auto r = run_cli({"--out", (dir / "o").string(), "ingest", (dir / "bad.jsonl").string()});
  CHECK(r.status == 2);
  CHECK(r.err.find(":2") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "o" / "corpus.jsonl"));

  CHECK(run_cli({"--out", (dir / "o").string(), "gen-tasks", "--corpus", (dir / "none.jsonl").string()}).status == 3);
  CHECK(run_cli({"verify", (dir / "none.jsonl").string()}).status == 3);
}

TEST_CASE("unwritable output directory fails before any work") {
  TempDir dir("cli-unwritable");
  testing::spit(dir / "raw.jsonl", testing::synth_corpus_jsonl(1, 5));
  testing::spit(dir / "blocker", "a file, not a directory");
  auto r = run_cli({"--out", (dir / "blocker" / "sub").string(), "ingest", (dir / "raw.jsonl").string()});
  CHECK(r.status == 3);
  CHECK(r.err.find("not writable") != std::string::npos);
  r = run_cli({"--out", (dir / "blocker").string(), "gen-tasks", "--corpus", (dir / "raw.jsonl").string()});
  CHECK(r.status == 3);
}

TEST_CASE("full pipeline is byte-identical across runs and directories") {
  TempDir dir("cli-pipeline");
  pipeline(dir / "a", "42");
  pipeline(dir / "b", "42");
  auto a = testing::snapshot(dir / "a");
  auto b = testing::snapshot(dir / "b");
  CHECK(a.size() > 15);
  CHECK(a == b);
  CHECK(a.count("p/plan_pit.json"));
  CHECK(a.count("p/pit_stage1.jsonl"));
  CHECK(a.count("s/train_qa_nli.jsonl"));

  // Rerunning in place rewrites identical bytes.
  pipeline(dir / "a", "42");
  CHECK(testing::snapshot(dir / "a") == b);

  pipeline(dir / "c", "43");
  auto c = testing::snapshot(dir / "c");
  CHECK(c["c/corpus.jsonl"] == a["c/corpus.jsonl"]);
  CHECK(c["t/all_self_teaching.jsonl"] != a["t/all_self_teaching.jsonl"]);

  for (const char* m : {"s/train_doc.jsonl", "s/test_doc.jsonl", "s/train_qa.jsonl", "p/pit_stage1.jsonl"}) {
    auto v = run_cli({"verify", (dir / "a" / m).string()});
    CHECK_MESSAGE(v.status == 0, m, v.err);
    CHECK(v.json()["ok"] == true);
  }
}

TEST_CASE("verify detects a flipped byte") {
  TempDir dir("cli-verify");
  pipeline(dir / "a", "1");
  fs::path m = dir / "a" / "s" / "train_doc.jsonl";
  std::string bytes = testing::slurp(m);
  bytes[bytes.find("Wikipedia> ") + 12] ^= 0x01;
  testing::spit(m, bytes);
  auto v = run_cli({"verify", m.string()});
  CHECK(v.status == 2);
  CHECK(v.err.find("first mismatch") != std::string::npos);
}

TEST_CASE("seed precedence: flag over config file over environment") {
  TempDir dir("cli-precedence");
  testing::spit(dir / "raw.jsonl", testing::synth_corpus_jsonl(2, 4));
  testing::spit(dir / "cfg.toml", "seed = 7\nout = \"from_config\"\n");
  auto seed_of = [&](const std::vector<std::string>& args, const std::vector<std::string>& env) {
    auto r = run_cli(args, dir.path(), env);
    REQUIRE_MESSAGE(r.status == 0, r.err);
    return r.json()["stats"]["seed"].get<std::uint64_t>();
  };
  std::vector<std::string> tail = {"gen-tasks", "--corpus", "raw.jsonl"};
  auto with = [&](std::vector<std::string> head) {
    head.insert(head.end(), tail.begin(), tail.end());
    return head;
  };
  CHECK(seed_of(with({}), {}) == 0);
  CHECK(seed_of(with({}), {"ABSORB_SEED=9"}) == 9);
  CHECK(seed_of(with({"--config", "cfg.toml"}), {"ABSORB_SEED=9"}) == 7);
  CHECK(seed_of(with({"--config", "cfg.toml", "--seed", "11"}), {"ABSORB_SEED=9"}) == 11);
  CHECK(fs::exists(dir / "from_config" / "all_self_teaching.jsonl"));
  CHECK(seed_of(with({"--out", "flag_out"}), {"ABSORB_OUT=env_out"}) == 0);
  CHECK(fs::exists(dir / "flag_out" / "all_self_teaching.jsonl"));
  CHECK_FALSE(fs::exists(dir / "env_out"));
}

TEST_CASE("gen-qa talks to a chat endpoint and replays its cache") {
  MockChat mock;
  TempDir dir("cli-genqa");
  testing::spit(dir / "raw.jsonl", testing::synth_corpus_jsonl(5, 3));
  std::vector<std::string> args = {"--out", "q", "--jobs", "2", "gen-qa", "--corpus", "raw.jsonl", "--retries", "0"};
  auto r = run_cli(args, dir.path(), {"ABSORB_CHAT_URL=" + mock.url(), "ABSORB_API_KEY=sekrit"});
  REQUIRE_MESSAGE(r.status == 0, r.err);
  CHECK(mock.hits == 6);
  CHECK(mock.unauthorized == 0);
  auto j = r.json();
  CHECK(j["pairs"]["generation"] == 6);
  CHECK(j["pairs"]["nli"] == 6);
  std::string first = testing::slurp(dir / "q" / "qa.jsonl");
  CHECK(first.find("\"answer_label\":\"No\"") != std::string::npos);

  auto replay = args;
  replay.push_back("--cache-only");
  auto again = run_cli(replay, dir.path());
  REQUIRE_MESSAGE(again.status == 0, again.err);
  CHECK(mock.hits == 6);
  CHECK(again.json()["cache_hits"] == 6);
  CHECK(testing::slurp(dir / "q" / "qa.jsonl") == first);

  auto stats = run_cli({"--out", "st", "stats", "--qa", "q/qa.jsonl", "--corpus", "raw.jsonl"}, dir.path());
  REQUIRE(stats.status == 0);
  CHECK(stats.json()["nli_labels"]["Yes"] == 50.0);

  CHECK(run_cli({"--out", "q2", "gen-qa", "--corpus", "raw.jsonl", "--cache-only"}, dir.path()).status == 3);
  CHECK(run_cli({"--out", "q3", "gen-qa", "--corpus", "raw.jsonl"}, dir.path()).status == 1);
}

TEST_CASE("gen-qa error statuses") {
  MockChat mock;
  TempDir dir("cli-genqa-errors");
  testing::spit(dir / "raw.jsonl", testing::synth_corpus_jsonl(5, 1));
  mock.forced_body = "{\"choices\":[{\"message\":{\"content\":\"no structure at all\"}}]}";
  auto r = run_cli({"--out", "q", "gen-qa", "--corpus", "raw.jsonl", "--chat-url", mock.url(), "--task", "generation"},
                   dir.path());
  CHECK(r.status == 2);
  mock.forced_body = "{\"error\":\"bad request\"}";
  mock.status = 400;
  r = run_cli({"--out", "q2", "gen-qa", "--corpus", "raw.jsonl", "--chat-url", mock.url()}, dir.path());
  CHECK(r.status == 3);
  mock.status = 503;
  int before = mock.hits;
  r = run_cli({"--out", "q3", "gen-qa", "--corpus", "raw.jsonl", "--chat-url", mock.url(), "--task", "nli",
               "--retries", "2", "--backoff-ms", "1"},
              dir.path());
  CHECK(r.status == 3);
  CHECK(mock.hits - before == 3);
}

TEST_CASE("eval reproduces the hand-scored fixture") {
  TempDir dir("cli-eval");
  auto r = run_cli({"eval", "--references", testing::fixture("eval10/references.jsonl").string(), "--predictions",
                    testing::fixture("eval10/predictions.jsonl").string(), "--judge", "exact", "--report",
                    (dir / "r.json").string()});
  REQUIRE_MESSAGE(r.status == 0, r.err);
  auto expected = absorb::Json::parse(testing::slurp(testing::fixture("eval10/expected.json")));
  CHECK(r.json()["metrics"] == expected["metrics"]);
  CHECK(absorb::Json::parse(testing::slurp(dir / "r.json"))["metrics"] == expected["metrics"]);

  testing::spit(dir / "short.jsonl", "{\"item_id\":\"i01\",\"prediction\":\"x\"}\n");
  r = run_cli({"eval", "--references", testing::fixture("eval10/references.jsonl").string(), "--predictions",
               (dir / "short.jsonl").string(), "--report", (dir / "r2.json").string()});
  CHECK(r.status == 2);
  CHECK_FALSE(fs::exists(dir / "r2.json"));
}

TEST_CASE("plan lists presets") {
  auto r = run_cli({"plan", "--list"});
  REQUIRE(r.status == 0);
  CHECK(r.out.find("self_tuning_via_reading") != std::string::npos);
}
