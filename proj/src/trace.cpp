#include "recall/trace.hpp"

#include <fstream>
#include <sstream>

#include "recall/error.hpp"

namespace recall::trace {

std::string EpisodeTrace::to_jsonl() const {
    std::ostringstream out;
    for (const auto& e : events_) {
        out << e.dump() << "\n";
    }
    return out.str();
}

void EpisodeTrace::write(const std::filesystem::path& path) const {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot open trace file '" + path.string() + "' for writing");
    }
    out << to_jsonl();
}

}  // namespace recall::trace
