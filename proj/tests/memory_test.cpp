#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "recall/error.hpp"
#include "recall/memory.hpp"
#include "recall/persist.hpp"

using namespace recall;
using memory::ExperiencePool;
using memory::TaskSpec;
using memory::Trajectory;

namespace {

TaskSpec task(const std::string& id) {
    TaskSpec t;
    t.id = id;
    t.instruction = "instruction for " + id;
    t.env_name = "minihouse";
    return t;
}

Trajectory trial(const std::string& task_id, int index, bool succeeded) {
    Trajectory t;
    t.task_id = task_id;
    t.trial_index = index;
    t.initial_observation = "start";
    memory::Step step;
    step.index = 0;
    step.action = succeeded ? "win" : "flail";
    step.observation = succeeded ? "done" : "Nothing happens.";
    t.steps.push_back(step);
    t.succeeded = succeeded;
    t.reward = succeeded ? 1.0 : 0.0;
    return t;
}

}  // namespace

TEST_CASE("append_trial stores trials in order") {
    ExperiencePool pool;
    pool.add_task(task("t1"));
    pool.append_trial(trial("t1", 0, false));
    CHECK(pool.trial_count() == 1);
    pool.append_trial(trial("t1", 1, false));
    const auto& trials = pool.trials_for("t1");
    REQUIRE(trials.size() == 2);
    CHECK(trials[0].trial_index == 0);
    CHECK(trials[1].trial_index == 1);
}

TEST_CASE("append_trial rejects unknown tasks and gaps") {
    ExperiencePool pool;
    pool.add_task(task("t1"));
    CHECK_THROWS_WITH_AS(pool.append_trial(trial("nope", 0, false)),
                         doctest::Contains("unknown task_id"), Error);
    CHECK_THROWS_WITH_AS(pool.append_trial(trial("t1", 2, false)),
                         doctest::Contains("non-contiguous"), Error);
}

TEST_CASE("a success is always the last trial of its task") {
    ExperiencePool pool;
    pool.add_task(task("t1"));
    pool.append_trial(trial("t1", 0, true));
    CHECK_THROWS_WITH_AS(pool.append_trial(trial("t1", 1, false)),
                         doctest::Contains("already has a succeeded trial"), Error);
}

TEST_CASE("task registration enforces ids and instructions") {
    ExperiencePool pool;
    pool.add_task(task("t1"));
    CHECK_THROWS_WITH_AS(pool.add_task(task("t1")), doctest::Contains("duplicate"), Error);
    TaskSpec empty = task("t2");
    empty.instruction = "";
    CHECK_THROWS_AS(pool.add_task(empty), Error);
}

TEST_CASE("compare_view pairs the success with failures in trial order") {
    ExperiencePool pool;
    pool.add_task(task("t1"));
    pool.append_trial(trial("t1", 0, false));
    pool.append_trial(trial("t1", 1, false));
    pool.append_trial(trial("t1", 2, true));

    const auto view = memory::compare_view(pool);
    REQUIRE(view.count("t1") == 1);
    const auto& entry = view.at("t1");
    CHECK(entry.success.trial_index == 2);
    REQUIRE(entry.failures.size() == 2);
    CHECK(entry.failures[0].trial_index == 0);
    CHECK(entry.failures[1].trial_index == 1);
}

TEST_CASE("compare_view excludes single-outcome tasks") {
    ExperiencePool pool;
    pool.add_task(task("solved_first_try"));
    pool.append_trial(trial("solved_first_try", 0, true));
    pool.add_task(task("never_solved"));
    pool.append_trial(trial("never_solved", 0, false));
    pool.append_trial(trial("never_solved", 1, false));

    CHECK(memory::compare_view(pool).empty());
    const auto solved = memory::success_view(pool);
    CHECK(solved.size() == 1);
    CHECK(solved.count("solved_first_try") == 1);
}

TEST_CASE("success_view covers compare tasks too") {
    ExperiencePool pool;
    for (const auto& id : {std::string("a"), std::string("b"), std::string("c")}) {
        pool.add_task(task(id));
    }
    pool.append_trial(trial("a", 0, false));
    pool.append_trial(trial("a", 1, true));
    pool.append_trial(trial("b", 0, true));
    pool.append_trial(trial("c", 0, false));

    const auto solved = memory::success_view(pool);
    const auto compared = memory::compare_view(pool);
    CHECK(solved.size() == 2);
    CHECK(compared.size() == 1);
    // compare_view ⊆ success_view domain
    for (const auto& [id, entry] : compared) {
        CHECK(solved.count(id) == 1);
    }
}

TEST_CASE("pool round-trips through JSONL byte-stably") {
    ExperiencePool pool;
    pool.embedder_id = "fnv-signed-hash-256/1";
    pool.focus_points.items = {"check the desk first", "keep hands free"};
    pool.focus_points.source_env = "minihouse";
    for (const auto& id : {std::string("a"), std::string("b"), std::string("c")}) {
        pool.add_task(task(id));
    }
    pool.append_trial(trial("a", 0, false));
    pool.append_trial(trial("a", 1, true));
    pool.append_trial(trial("b", 0, true));

    const std::string text = persist::pool_to_jsonl(pool);
    const ExperiencePool loaded = persist::pool_from_jsonl(text);
    CHECK(loaded == pool);
    CHECK(persist::pool_to_jsonl(loaded) == text);
}

TEST_CASE("empty pool round-trips") {
    ExperiencePool pool;
    const auto loaded = persist::pool_from_jsonl(persist::pool_to_jsonl(pool));
    CHECK(loaded == pool);
}

TEST_CASE("truncated pool file fails without a partial pool") {
    ExperiencePool pool;
    pool.add_task(task("a"));
    pool.append_trial(trial("a", 0, true));
    std::string text = persist::pool_to_jsonl(pool);
    text = text.substr(0, text.size() / 2);
    CHECK_THROWS_AS(persist::pool_from_jsonl(text), ParseError);
}

TEST_CASE("pool parse errors name the line") {
    CHECK_THROWS_WITH_AS(persist::pool_from_jsonl("{\"schema\": \"recall.pool/1\""),
                         doctest::Contains("line 1"), ParseError);
}

TEST_CASE("pool schema mismatch is an explicit error") {
    std::string text = "{\"schema\":\"recall.pool/999\"}\n";
    CHECK_THROWS_WITH(persist::pool_from_jsonl(text), doctest::Contains("schema mismatch"));
}

TEST_CASE("tips dictionary round-trips with order and env annotation") {
    memory::TipsDictionary tips;
    tips.put("b", {{"check the desk first", "compare"}, {"keep hands free", "success_supplement"}});
    tips.put("a", {{"scan shelves left to right", "success"}});

    const std::string text = persist::tips_to_json(tips, "minihouse");
    std::string env;
    const auto loaded = persist::tips_from_json(text, &env);
    CHECK(loaded == tips);
    CHECK(env == "minihouse");
    CHECK(loaded.entries[0].first == "b");  // build order survives
    CHECK(persist::tips_to_json(loaded, env) == text);
}

TEST_CASE("tips file errors") {
    CHECK_THROWS_AS(persist::tips_from_json("{not json"), ParseError);
    CHECK_THROWS_WITH(persist::tips_from_json("{\"schema\":\"recall.tips/0\",\"env_name\":\"\",\"entries\":[]}"),
                      doctest::Contains("schema mismatch"));
}

TEST_CASE("pool and tips save/load through files") {
    const auto dir = std::filesystem::temp_directory_path() / "recall_persist_test";
    std::filesystem::create_directories(dir);
    ExperiencePool pool;
    pool.add_task(task("a"));
    pool.append_trial(trial("a", 0, true));
    persist::save_pool(pool, dir / "pool.jsonl");
    CHECK(persist::load_pool(dir / "pool.jsonl") == pool);

    memory::TipsDictionary tips;
    tips.put("a", {{"stay calm", "success"}});
    persist::save_tips(tips, dir / "tips.json", "minihouse");
    CHECK(persist::load_tips(dir / "tips.json") == tips);
    std::filesystem::remove_all(dir);
}

TEST_CASE("trajectory rendering keeps initial observation, thoughts, and corrections") {
    Trajectory t = trial("a", 0, false);
    t.steps[0].thought = "look around";
    t.steps[0].correction = "stop flailing";
    const std::string text = t.to_text();
    CHECK(text.find("start\n") == 0);
    CHECK(text.find("> think: look around\n") != std::string::npos);
    CHECK(text.find("> flail\n") != std::string::npos);
    CHECK(text.find("[correction] stop flailing\n") != std::string::npos);
}

TEST_CASE("trajectory tail truncation keeps the last steps") {
    Trajectory t;
    t.task_id = "a";
    t.initial_observation = "start";
    for (int i = 0; i < 10; ++i) {
        memory::Step s;
        s.index = i;
        s.action = "action " + std::to_string(i);
        s.observation = "obs " + std::to_string(i);
        t.steps.push_back(s);
    }
    const std::string text = t.to_text(3);
    CHECK(text.find("7 earlier steps omitted") != std::string::npos);
    CHECK(text.find("action 6") == std::string::npos);
    CHECK(text.find("action 7") != std::string::npos);
    CHECK(text.find("action 9") != std::string::npos);
}
