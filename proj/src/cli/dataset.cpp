#include "iclslope/cli/dataset.hpp"

#include <fstream>
#include <map>

namespace iclslope::cli {

using json = nlohmann::json;

DataError::DataError(const std::string& path, std::size_t line, const std::string& what)
    : Error(path + ":" + std::to_string(line) + ": " + what), path_(path), line_(line) {}

namespace {

std::string required_string(const json& obj, const char* key, const std::string& path, std::size_t line) {
    if (!obj.contains(key)) throw DataError(path, line, std::string("missing required field \"") + key + "\"");
    const auto& v = obj[key];
    if (!v.is_string()) throw DataError(path, line, std::string("field \"") + key + "\" must be a string");
    auto s = v.get<std::string>();
    if (s.empty()) throw DataError(path, line, std::string("field \"") + key + "\" must not be empty");
    return s;
}

std::optional<std::string> optional_string(const json& obj, const char* key, const std::string& path,
                                           std::size_t line) {
    if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
    if (!obj[key].is_string()) throw DataError(path, line, std::string("field \"") + key + "\" must be a string");
    return obj[key].get<std::string>();
}

std::optional<bool> optional_bool(const json& obj, const char* key, const std::string& path, std::size_t line) {
    if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
    if (!obj[key].is_boolean()) throw DataError(path, line, std::string("field \"") + key + "\" must be a boolean");
    return obj[key].get<bool>();
}

std::optional<std::vector<double>> optional_embedding(const json& obj, const std::string& path, std::size_t line) {
    if (!obj.contains("embedding") || obj["embedding"].is_null()) return std::nullopt;
    const auto& v = obj["embedding"];
    if (!v.is_array()) throw DataError(path, line, "field \"embedding\" must be an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& x : v) {
        if (!x.is_number()) throw DataError(path, line, "field \"embedding\" must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

template <typename T, typename Parse>
std::vector<Record<T>> read_jsonl(const std::string& path, Parse parse) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError(path, 0, "cannot open file");
    std::vector<Record<T>> records;
    std::map<std::string, std::size_t> seen;
    std::string raw;
    for (std::size_t line = 1; std::getline(in, raw); ++line) {
        std::string text = raw;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        if (text.find_first_not_of(" \t") == std::string::npos) continue;
        const auto obj = json::parse(text, nullptr, false);
        if (obj.is_discarded()) throw DataError(path, line, "line is not valid JSON");
        if (!obj.is_object()) throw DataError(path, line, "line must hold a JSON object");
        T value = parse(obj, path, line);
        const auto [it, inserted] = seen.emplace(value.id, line);
        if (!inserted) {
            throw DataError(path, line, "duplicate id \"" + value.id + "\" (first seen on line " +
                                            std::to_string(it->second) + ")");
        }
        records.push_back(Record<T>{std::move(value), line, std::move(raw)});
    }
    return records;
}

TaskInstance parse_instance(const json& obj, const std::string& path, std::size_t line) {
    TaskInstance instance;
    instance.id = required_string(obj, "id", path, line);
    instance.question = required_string(obj, "question", path, line);
    instance.reference_output = required_string(obj, "answer", path, line);
    instance.reasoning = optional_string(obj, "reasoning", path, line);
    instance.original_reasoning = optional_string(obj, "original_reasoning", path, line);
    instance.correctness_1shot = optional_bool(obj, "correct_1shot", path, line);
    instance.correctness_0shot = optional_bool(obj, "correct_0shot", path, line);
    instance.embedding = optional_embedding(obj, path, line);
    return instance;
}

Demonstration parse_demo(const json& obj, const std::string& path, std::size_t line) {
    Demonstration demo;
    demo.id = required_string(obj, "id", path, line);
    demo.question = required_string(obj, "question", path, line);
    demo.output = required_string(obj, "output", path, line);
    if (auto origin = optional_string(obj, "origin", path, line)) {
        try {
            demo.origin = origin_from_string(*origin);
        } catch (const InvalidInput& e) {
            throw DataError(path, line, e.what());
        }
    }
    demo.embedding = optional_embedding(obj, path, line);
    return demo;
}

}  // namespace

std::vector<Record<TaskInstance>> read_dataset(const std::string& path) {
    return read_jsonl<TaskInstance>(path, parse_instance);
}

std::vector<TaskInstance> ingest_dataset(const std::string& path) {
    std::vector<TaskInstance> out;
    for (auto& r : read_dataset(path)) out.push_back(std::move(r.value));
    return out;
}

std::vector<Record<Demonstration>> read_pool(const std::string& path) {
    return read_jsonl<Demonstration>(path, parse_demo);
}

std::vector<Demonstration> ingest_pool(const std::string& path) {
    std::vector<Demonstration> out;
    for (auto& r : read_pool(path)) out.push_back(std::move(r.value));
    return out;
}

nlohmann::ordered_json to_json(const TaskInstance& instance) {
    nlohmann::ordered_json j;
    j["id"] = instance.id;
    j["question"] = instance.question;
    j["answer"] = instance.reference_output;
    if (instance.reasoning) j["reasoning"] = *instance.reasoning;
    if (instance.original_reasoning) j["original_reasoning"] = *instance.original_reasoning;
    if (instance.correctness_1shot) j["correct_1shot"] = *instance.correctness_1shot;
    if (instance.correctness_0shot) j["correct_0shot"] = *instance.correctness_0shot;
    if (instance.embedding) j["embedding"] = *instance.embedding;
    return j;
}

nlohmann::ordered_json to_json(const Demonstration& demo) {
    nlohmann::ordered_json j;
    j["id"] = demo.id;
    j["question"] = demo.question;
    j["output"] = demo.output;
    j["origin"] = std::string(to_string(demo.origin));
    if (demo.embedding) j["embedding"] = *demo.embedding;
    return j;
}

}  // namespace iclslope::cli
