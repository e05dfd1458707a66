#pragma once

#include <filesystem>
#include <string>

#include "recall/memory.hpp"

namespace recall::persist {

// Experience pool file: JSON lines. First record is a header carrying the
// schema tag, tasks, focus points, and embedder id; every following record
// is one trajectory. Keys are emitted in a fixed order so identical pools
// serialize to identical bytes.
inline constexpr const char* kPoolSchema = "recall.pool/1";

// Tips dictionary file: a single JSON document.
inline constexpr const char* kTipsSchema = "recall.tips/1";

void save_pool(const memory::ExperiencePool& pool, const std::filesystem::path& path);
memory::ExperiencePool load_pool(const std::filesystem::path& path);

void save_tips(const memory::TipsDictionary& tips, const std::filesystem::path& path,
               const std::string& env_name = "");
memory::TipsDictionary load_tips(const std::filesystem::path& path,
                                 std::string* env_name = nullptr);

// In-memory forms, used by the file functions and by tests.
std::string pool_to_jsonl(const memory::ExperiencePool& pool);
memory::ExperiencePool pool_from_jsonl(const std::string& text);
std::string tips_to_json(const memory::TipsDictionary& tips, const std::string& env_name = "");
memory::TipsDictionary tips_from_json(const std::string& text, std::string* env_name = nullptr);

}  // namespace recall::persist
