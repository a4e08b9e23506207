#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "iclslope/core.hpp"

namespace iclslope::cli {

/// Malformed input file; the message names the file and line.
class DataError : public Error {
public:
    DataError(const std::string& path, std::size_t line, const std::string& what);

    const std::string& path() const noexcept { return path_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string path_;
    std::size_t line_;
};

template <typename T>
struct Record {
    T value;
    std::size_t line = 0;
    std::string raw;
};

/// JSONL, one instance per line:
///   {"id", "question", "answer", "reasoning"?, "correct_1shot"?, "correct_0shot"?, "embedding"?}
/// Blank lines are skipped. Duplicate ids are rejected with both line numbers.
std::vector<Record<TaskInstance>> read_dataset(const std::string& path);
std::vector<TaskInstance> ingest_dataset(const std::string& path);

/// JSONL, one demonstration per line: {"id", "question", "output", "origin"?, "embedding"?}
std::vector<Record<Demonstration>> read_pool(const std::string& path);
std::vector<Demonstration> ingest_pool(const std::string& path);

nlohmann::ordered_json to_json(const TaskInstance& instance);
nlohmann::ordered_json to_json(const Demonstration& demo);

}  // namespace iclslope::cli
