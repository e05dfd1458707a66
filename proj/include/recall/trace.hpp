#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace recall::trace {

// Ordered event log for one episode or trial; the primary debugging
// artifact. Serializes to JSON lines with stable key order.
class EpisodeTrace {
public:
    void event(nlohmann::ordered_json record) { events_.push_back(std::move(record)); }

    void note(const std::string& kind, const std::string& message) {
        nlohmann::ordered_json j;
        j["event"] = kind;
        j["message"] = message;
        events_.push_back(std::move(j));
    }

    const std::vector<nlohmann::ordered_json>& events() const { return events_; }
    bool empty() const { return events_.empty(); }

    std::string to_jsonl() const;
    void write(const std::filesystem::path& path) const;

private:
    std::vector<nlohmann::ordered_json> events_;
};

// Receives finished traces keyed by a relative name such as
// "collect/task__trial0".
using TraceSink = std::function<void(const std::string& name, const EpisodeTrace& trace)>;

}  // namespace recall::trace
