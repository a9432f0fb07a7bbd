#include "pgds/core_data.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "pgds/common.hpp"

namespace pgds {

namespace {

std::optional<std::string> optional_string(const Json& record, const char* field, std::string_view where) {
    auto it = record.find(field);
    if (it == record.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw ValidationError(std::string(where) + ": field '" + field + "' must be a string");
    return it->get<std::string>();
}

}  // namespace

std::optional<double> Sample::extra_number(const std::string& key) const {
    auto it = extra.find(key);
    if (it == extra.end()) return std::nullopt;
    const std::string& text = it->second;
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || text.empty()) {
        throw ValidationError("sample '" + id + "': extra." + key + " is not a decimal number: '" + text + "'");
    }
    return value;
}

std::string_view to_string(SplitName name) {
    switch (name) {
        case SplitName::Train: return "train";
        case SplitName::Validation: return "validation";
        case SplitName::Test: return "test";
    }
    return "train";
}

SplitCounts split_stats(const DatasetSplit& split) {
    SplitCounts counts;
    for (const Sample& s : split.samples) {
        if (!s.label) ++counts.unlabeled;
        else if (*s.label == 1) ++counts.positive;
        else ++counts.negative;
    }
    counts.total = split.samples.size();
    return counts;
}

ParsedResponse::ParsedResponse(bool sarcastic, std::string target, std::string explanation, std::string raw)
    : sarcastic_(sarcastic), raw_(std::move(raw)) {
    if (sarcastic_) {
        target_ = std::move(target);
        explanation_ = std::move(explanation);
    }
}

Json sample_to_json(const Sample& sample) {
    Json j = Json::object();
    j["id"] = sample.id;
    if (sample.image_path) j["image_path"] = *sample.image_path;
    j["text"] = sample.text;
    if (sample.label) j["label"] = *sample.label;
    if (sample.target) j["target"] = *sample.target;
    if (sample.explanation) j["explanation"] = *sample.explanation;
    if (!sample.extra.empty()) j["extra"] = sample.extra;
    return j;
}

Sample sample_from_json(const Json& record, std::string_view where) {
    if (!record.is_object()) throw ValidationError(std::string(where) + ": record is not an object");
    Sample s;
    auto id = record.find("id");
    if (id == record.end() || !id->is_string() || id->get<std::string>().empty()) {
        throw ValidationError(std::string(where) + ": field 'id' must be a non-empty string");
    }
    s.id = id->get<std::string>();
    s.image_path = optional_string(record, "image_path", where);
    s.text = optional_string(record, "text", where).value_or("");
    if (auto label = record.find("label"); label != record.end() && !label->is_null()) {
        if (!label->is_number_integer() || (label->get<int>() != 0 && label->get<int>() != 1)) {
            throw ValidationError(std::string(where) + ": field 'label' must be 0 or 1");
        }
        s.label = label->get<int>();
    }
    s.target = optional_string(record, "target", where);
    s.explanation = optional_string(record, "explanation", where);
    if (auto extra = record.find("extra"); extra != record.end() && !extra->is_null()) {
        if (!extra->is_object()) throw ValidationError(std::string(where) + ": field 'extra' must be an object");
        for (const auto& [key, value] : extra->items()) {
            if (!value.is_string()) {
                throw ValidationError(std::string(where) + ": field 'extra." + key + "' must be a string");
            }
            s.extra.emplace(key, value.get<std::string>());
        }
    }
    return s;
}

std::string dump_record(const Json& record) {
    return record.dump(-1, ' ', false, Json::error_handler_t::strict);
}

std::vector<Json> read_records(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path.string() + "'");
    std::vector<Json> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        try {
            records.push_back(Json::parse(line));
        } catch (const Json::parse_error& e) {
            throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": malformed record: " + e.what());
        }
    }
    return records;
}

void write_records(const std::vector<Json>& records, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeFailure("cannot write '" + path.string() + "'");
    for (const Json& r : records) out << dump_record(r) << '\n';
    if (!out) throw RuntimeFailure("write failed for '" + path.string() + "'");
}

DatasetSplit load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("dataset file not found: '" + path.string() + "'");
    DatasetSplit split;
    split.name = path.stem().string();
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        Json record;
        try {
            record = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw ValidationError(where + ": malformed record: " + e.what());
        }
        Sample s = sample_from_json(record, where);
        if (!seen.insert(s.id).second) throw ValidationError(where + ": duplicate id '" + s.id + "'");
        split.samples.push_back(std::move(s));
    }
    return split;
}

void save_dataset(const DatasetSplit& split, const std::filesystem::path& path) {
    std::vector<Json> records;
    records.reserve(split.samples.size());
    for (const Sample& s : split.samples) records.push_back(sample_to_json(s));
    write_records(records, path);
}

}  // namespace pgds

namespace pgds {

void write_provenance(const std::filesystem::path& path, const Json& run_config) {
    const Json record = {{"file", path.filename().string()},
                         {"version", std::string(kArtifactVersion)},
                         {"run_config", run_config}};
    write_records({record}, std::filesystem::path(path.string() + ".provenance.json"));
}

}  // namespace pgds
