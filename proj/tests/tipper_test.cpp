#include <doctest.h>

#include <memory>
#include <set>

#include "recall/error.hpp"
#include "recall/tipper.hpp"

using namespace recall;
using llm::RoleId;
using llm::ScriptedBackend;
using memory::Tip;
using memory::Trajectory;
using tipper::Tipper;

namespace {

llm::Gateway make_gateway(std::vector<llm::ScriptEntry> entries) {
    return llm::Gateway(llm::PromptLibrary::defaults(),
                        std::make_shared<ScriptedBackend>(std::move(entries)));
}

Trajectory traj(const std::string& task_id, int index, bool succeeded) {
    Trajectory t;
    t.task_id = task_id;
    t.trial_index = index;
    t.initial_observation = "Your task is to: " + task_id + ".";
    memory::Step s;
    s.index = 0;
    s.action = succeeded ? "solve it" : "fumble";
    s.observation = succeeded ? "Solved." : "Nothing happens.";
    t.steps.push_back(s);
    t.succeeded = succeeded;
    t.reward = succeeded ? 1.0 : 0.0;
    return t;
}

memory::ExperiencePool pool_with(const std::vector<std::pair<std::string, int>>& tasks) {
    // second: -1 never solved, 0 first-try, n>0 solved on trial n
    memory::ExperiencePool pool;
    for (const auto& [id, solved_on] : tasks) {
        memory::TaskSpec t;
        t.id = id;
        t.instruction = "do " + id;
        t.env_name = "minihouse";
        pool.add_task(t);
        if (solved_on < 0) {
            pool.append_trial(traj(id, 0, false));
            pool.append_trial(traj(id, 1, false));
        } else {
            for (int z = 0; z < solved_on; ++z) pool.append_trial(traj(id, z, false));
            pool.append_trial(traj(id, solved_on, true));
        }
    }
    return pool;
}

}  // namespace

TEST_CASE("compare tips parse, cap at 5, and carry the compare origin") {
    auto gateway = make_gateway({{RoleId::Tips, "",
                                  "1. one\n2. two\n3. three\n4. four\n5. five\n6. six\n7. seven"}});
    Tipper tipper(gateway);
    const auto tips = tipper.extract_compare_tips(traj("t", 1, true), {traj("t", 0, false)});
    REQUIRE(tips.size() == 5);
    CHECK(tips[0].text == "one");
    CHECK(tips[4].text == "five");
    for (const auto& tip : tips) CHECK(tip.origin == "compare");
}

TEST_CASE("compare tips demand at least one failure") {
    auto gateway = make_gateway({});
    Tipper tipper(gateway);
    CHECK_THROWS_WITH(tipper.extract_compare_tips(traj("t", 0, true), {}),
                      doctest::Contains("no failed trajectories"));
}

TEST_CASE("compare prompt shows both failure and success sections") {
    auto gateway = make_gateway({{RoleId::Tips, "Failed attempt 1", "1. tip"}});
    Tipper tipper(gateway);
    CHECK(tipper.extract_compare_tips(traj("t", 1, true), {traj("t", 0, false)}).size() == 1);
    const auto trace = gateway.trace_snapshot();
    REQUIRE(trace.size() == 1);
    CHECK(trace[0].rendered_prompt.find("The successful attempt:") != std::string::npos);
}

TEST_CASE("supplements cap at 3, dedup against existing, and extend the entry") {
    const std::vector<Tip> existing = {{"one", "compare"}, {"two", "compare"}};
    auto gateway = make_gateway(
        {{RoleId::Tips, "", "1. one\n2. fresh insight\n3. another angle\n4. overflow"}});
    Tipper tipper(gateway);
    const auto extra = tipper.extract_success_supplement(traj("t", 1, true), existing);
    REQUIRE(extra.size() == 2);  // "one" deduped, "overflow" truncated by the cap
    CHECK(extra[0].text == "fresh insight");
    CHECK(extra[0].origin == "success_supplement");

    CHECK_THROWS_WITH(tipper.extract_success_supplement(traj("t", 1, true), {}),
                      doctest::Contains("no existing tips"));
}

TEST_CASE("success tips cap at 3 without padding") {
    auto gateway = make_gateway({{RoleId::Tips, "", "1. single tip"}});
    Tipper tipper(gateway);
    const auto tips = tipper.extract_success_tips(traj("t", 0, true));
    REQUIRE(tips.size() == 1);
    CHECK(tips[0].origin == "success");
}

TEST_CASE("unparseable tips are retried once then skip the task") {
    auto gateway = make_gateway({{RoleId::Tips, "", "prose"}, {RoleId::Tips, "", "more prose"}});
    Tipper tipper(gateway);
    CHECK_THROWS_AS(tipper.extract_success_tips(traj("t", 0, true)), ParseError);
    CHECK(gateway.trace_size() == 2);
}

TEST_CASE("build covers compare, first-try, and unsolved branches") {
    const auto pool = pool_with({{"compare_task", 1}, {"first_try", 0}, {"unsolved", -1}});
    auto gateway = make_gateway({
        {RoleId::Tips, "", "1. from compare\n2. also compare"},   // compare branch
        {RoleId::Tips, "", "1. from supplement"},                 // supplement
        {RoleId::Tips, "", "1. from success"},                    // first-try branch
    });
    Tipper tipper(gateway);
    trace::EpisodeTrace trace;
    const auto dictionary = tipper.build_tips_dictionary(pool, &trace);
    REQUIRE(dictionary.size() == 2);
    CHECK_FALSE(dictionary.contains("unsolved"));
    const auto& compare_entry = *dictionary.find("compare_task");
    REQUIRE(compare_entry.size() == 3);
    CHECK(compare_entry[0].origin == "compare");
    CHECK(compare_entry[2].origin == "success_supplement");
    const auto& success_entry = *dictionary.find("first_try");
    REQUIRE(success_entry.size() == 1);
    CHECK(success_entry[0].origin == "success");
}

TEST_CASE("TD domain equals the solved tasks and caps hold") {
    const auto pool =
        pool_with({{"a", 2}, {"b", 0}, {"c", -1}, {"d", 1}, {"e", 0}});
    std::vector<llm::ScriptEntry> entries;
    // a and d are compare tasks (2 calls each), b and e first-try (1 call each)
    const std::string many = "1. t1\n2. t2\n3. t3\n4. t4\n5. t5\n6. t6";
    for (int i = 0; i < 2; ++i) {
        entries.push_back({RoleId::Tips, "", many});
        entries.push_back({RoleId::Tips, "", many});
    }
    entries.push_back({RoleId::Tips, "", many});
    entries.push_back({RoleId::Tips, "", many});
    // consumption order is pool task order: a(compare, supplement), b(success),
    // d(compare, supplement), e(success)
    auto gateway = make_gateway(std::move(entries));
    Tipper tipper(gateway);
    const auto dictionary = tipper.build_tips_dictionary(pool);

    const auto solved = memory::success_view(pool);
    CHECK(dictionary.size() == solved.size());
    for (const auto& [task_id, tips] : dictionary.entries) {
        CHECK(solved.count(task_id) == 1);
        int compare_origin = 0;
        int success_origin = 0;
        std::set<std::string> texts;
        for (const auto& tip : tips) {
            if (tip.origin == "compare") ++compare_origin;
            if (tip.origin == "success" || tip.origin == "success_supplement") ++success_origin;
            CHECK(texts.insert(tip.text).second);  // no duplicate texts in an entry
        }
        CHECK(compare_origin <= 5);
        CHECK(success_origin <= 3);
    }
}

TEST_CASE("build is deterministic under the scripted backend") {
    const auto pool = pool_with({{"compare_task", 1}, {"first_try", 0}});
    auto make_entries = [] {
        return std::vector<llm::ScriptEntry>{
            {RoleId::Tips, "", "1. c1\n2. c2"},
            {RoleId::Tips, "", "1. s1"},
            {RoleId::Tips, "", "1. f1"},
        };
    };
    auto g1 = make_gateway(make_entries());
    auto g2 = make_gateway(make_entries());
    const auto d1 = Tipper(g1).build_tips_dictionary(pool);
    const auto d2 = Tipper(g2).build_tips_dictionary(pool);
    CHECK(d1 == d2);
}

TEST_CASE("empty pool gives an empty dictionary") {
    auto gateway = make_gateway({});
    Tipper tipper(gateway);
    CHECK(tipper.build_tips_dictionary(memory::ExperiencePool{}).empty());
}

TEST_CASE("align rewrites entries with the aligned origin") {
    memory::TipsDictionary tips;
    tips.put("t1", {{"use the search bar", "compare"}});
    auto gateway = make_gateway({{RoleId::Tips, "", "1. use the site search field"}});
    Tipper tipper(gateway);
    const auto aligned = tipper.align_tips(tips, "an online storefront with a search field");
    REQUIRE(aligned.size() == 1);
    const auto& entry = *aligned.find("t1");
    REQUIRE(entry.size() == 1);
    CHECK(entry[0].text == "use the site search field");
    CHECK(entry[0].origin == "aligned");
}

TEST_CASE("align preconditions and fallback") {
    memory::TipsDictionary tips;
    tips.put("t1", {{"keep receipts", "success"}});
    auto gateway = make_gateway({});
    Tipper tipper(gateway);
    CHECK_THROWS_WITH(tipper.align_tips(memory::TipsDictionary{}, "desc"),
                      doctest::Contains("empty"));
    CHECK_THROWS_WITH(tipper.align_tips(tips, ""), doctest::Contains("description"));

    // a rewrite with no parseable items keeps the original entry
    auto fallback_gateway = make_gateway({{RoleId::Tips, "", "cannot help with that"}});
    Tipper fallback_tipper(fallback_gateway);
    trace::EpisodeTrace trace;
    const auto kept = fallback_tipper.align_tips(tips, "somewhere new", &trace);
    CHECK(*kept.find("t1") == *tips.find("t1"));
    CHECK_FALSE(trace.empty());
}
