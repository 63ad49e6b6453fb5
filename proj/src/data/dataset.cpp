#include "hipcap/data/dataset.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "hipcap/error.hpp"

namespace hipcap {
namespace {

using json = nlohmann::json;

[[noreturn]] void fail(std::size_t record, const std::string& path, const std::string& what) {
    throw InputError("record " + std::to_string(record) + ": " + path + ": " + what);
}

const json& field(const json& obj, const char* key, std::size_t record, const std::string& path) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(record, path + key, "missing");
    return *it;
}

std::vector<double> number_array(const json& j, std::size_t record, const std::string& path) {
    if (!j.is_array()) fail(record, path, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) fail(record, path + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(j[i].get<double>());
    }
    return out;
}

std::size_t index_value(const json& j, std::size_t record, const std::string& path) {
    if (!j.is_number_integer() || j.get<long long>() < 0) fail(record, path, "expected a nonnegative integer");
    return j.get<std::size_t>();
}

SceneRecord parse_record(const json& j, std::size_t record) {
    if (!j.is_object()) fail(record, "$", "expected an object");
    SceneRecord r;
    const auto& id = field(j, "image_id", record, "");
    if (!id.is_string()) fail(record, "image_id", "expected a string");
    r.image_id = id.get<std::string>();
    if (auto it = j.find("split"); it != j.end()) {
        if (!it->is_string()) fail(record, "split", "expected a string");
        r.split = it->get<std::string>();
    }
    const auto& regions = field(j, "regions", record, "");
    if (!regions.is_array()) fail(record, "regions", "expected an array");
    for (std::size_t i = 0; i < regions.size(); ++i) {
        const std::string p = "regions[" + std::to_string(i) + "].";
        const auto& rj = regions[i];
        if (!rj.is_object()) fail(record, "regions[" + std::to_string(i) + "]", "expected an object");
        Region reg;
        reg.index = i;
        const auto box = number_array(field(rj, "box", record, p), record, p + "box");
        if (box.size() != 4) fail(record, p + "box", "expected [x1, y1, x2, y2]");
        try {
            reg.box = Box(box[0], box[1], box[2], box[3]);
        } catch (const InputError& e) {
            fail(record, p + "box", e.what());
        }
        if (auto it = rj.find("confidence"); it != rj.end()) {
            if (!it->is_number()) fail(record, p + "confidence", "expected a number");
            reg.confidence = it->get<double>();
        }
        reg.region_feature = number_array(field(rj, "region_feature", record, p), record, p + "region_feature");
        reg.instance_feature = number_array(field(rj, "instance_feature", record, p), record, p + "instance_feature");
        r.regions.push_back(std::move(reg));
    }
    if (auto it = j.find("edges"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) fail(record, "edges", "expected an array of [src, dst, label]");
        std::vector<RelationEdge> edges;
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string p = "edges[" + std::to_string(i) + "]";
            const auto& e = (*it)[i];
            if (!e.is_array() || e.size() != 3) fail(record, p, "expected [src, dst, label]");
            edges.push_back({index_value(e[0], record, p + "[0]"), index_value(e[1], record, p + "[1]"),
                             index_value(e[2], record, p + "[2]")});
        }
        r.edges = std::move(edges);
    }
    if (auto it = j.find("captions"); it != j.end()) {
        if (!it->is_array()) fail(record, "captions", "expected an array of strings");
        for (std::size_t i = 0; i < it->size(); ++i) {
            if (!(*it)[i].is_string()) fail(record, "captions[" + std::to_string(i) + "]", "expected a string");
            r.captions.push_back((*it)[i].get<std::string>());
        }
    }
    if (auto it = j.find("labels"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) fail(record, "labels", "expected an array of integers");
        std::vector<std::size_t> labels;
        for (std::size_t i = 0; i < it->size(); ++i) {
            labels.push_back(index_value((*it)[i], record, "labels[" + std::to_string(i) + "]"));
        }
        r.labels = std::move(labels);
    }
    return r;
}

json to_json(const SceneRecord& r) {
    json j;
    j["image_id"] = r.image_id;
    j["split"] = r.split;
    json regions = json::array();
    for (const auto& reg : r.regions) {
        json rj;
        rj["box"] = {reg.box.x1(), reg.box.y1(), reg.box.x2(), reg.box.y2()};
        rj["confidence"] = reg.confidence;
        rj["region_feature"] = reg.region_feature;
        rj["instance_feature"] = reg.instance_feature;
        regions.push_back(std::move(rj));
    }
    j["regions"] = std::move(regions);
    if (r.edges) {
        json edges = json::array();
        for (const auto& e : *r.edges) edges.push_back({e.src, e.dst, e.label});
        j["edges"] = std::move(edges);
    }
    j["captions"] = r.captions;
    if (r.labels) j["labels"] = *r.labels;
    return j;
}

}  // namespace

void validate_record(const SceneRecord& r, std::size_t record, const DatasetLimits& limits) {
    if (r.image_id.empty()) fail(record, "image_id", "must not be empty");
    if (r.regions.size() > limits.max_regions) {
        fail(record, "regions", std::to_string(r.regions.size()) + " regions exceed the limit of " +
                                    std::to_string(limits.max_regions));
    }
    const std::size_t dim = r.feature_dim();
    for (std::size_t i = 0; i < r.regions.size(); ++i) {
        const auto& reg = r.regions[i];
        const std::string p = "regions[" + std::to_string(i) + "].";
        if (reg.index != i) fail(record, p + "index", "must equal the region's position");
        if (!(reg.confidence >= 0.0 && reg.confidence <= 1.0)) fail(record, p + "confidence", "must lie in [0, 1]");
        if (reg.region_feature.empty()) fail(record, p + "region_feature", "must not be empty");
        if (reg.region_feature.size() != dim) {
            fail(record, p + "region_feature", "length " + std::to_string(reg.region_feature.size()) +
                                                   " differs from the scene's feature length " + std::to_string(dim));
        }
        if (reg.instance_feature.size() != dim) {
            fail(record, p + "instance_feature", "length " + std::to_string(reg.instance_feature.size()) +
                                                     " differs from the scene's feature length " + std::to_string(dim));
        }
        for (double v : reg.region_feature) {
            if (!std::isfinite(v)) fail(record, p + "region_feature", "contains a non-finite value");
        }
        for (double v : reg.instance_feature) {
            if (!std::isfinite(v)) fail(record, p + "instance_feature", "contains a non-finite value");
        }
    }
    if (r.edges) {
        try {
            SemanticGraph(r.regions.size(), *r.edges);
        } catch (const InputError& e) {
            fail(record, "edges", e.what());
        }
    }
    if (limits.require_captions && r.captions.empty()) fail(record, "captions", "at least one caption is required");
}

std::vector<SceneRecord> read_dataset(std::istream& in, const DatasetLimits& limits) {
    std::vector<SceneRecord> out;
    std::string line;
    std::size_t line_no = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw InputError("line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
        }
        if (first && j.is_object() && j.contains("format")) {
            first = false;
            if (j["format"] != "hipcap-scenes") throw InputError("line 1: not a hipcap scene file");
            if (j.value("version", 0) != kDatasetVersion) {
                throw InputError("unsupported dataset version " + j.value("version", json(0)).dump());
            }
            continue;
        }
        first = false;
        const std::size_t idx = out.size();
        SceneRecord r = parse_record(j, idx);
        validate_record(r, idx, limits);
        out.push_back(std::move(r));
    }
    return out;
}

void write_dataset(std::ostream& out, const std::vector<SceneRecord>& records) {
    out << json{{"format", "hipcap-scenes"}, {"version", kDatasetVersion}}.dump() << '\n';
    for (const auto& r : records) out << to_json(r).dump() << '\n';
}

std::vector<SceneRecord> load_dataset(const std::string& path, const DatasetLimits& limits) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset: " + path);
    try {
        return read_dataset(in, limits);
    } catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

void save_dataset(const std::string& path, const std::vector<SceneRecord>& records) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open dataset for writing: " + path);
    write_dataset(out, records);
    if (!out) throw IoError("write failed: " + path);
}

std::vector<const SceneRecord*> select_split(const std::vector<SceneRecord>& records, const std::string& split) {
    std::vector<const SceneRecord*> out;
    for (const auto& r : records) {
        if (r.split == split) out.push_back(&r);
    }
    return out;
}

const SceneRecord* find_record(const std::vector<SceneRecord>& records, const std::string& image_id) {
    for (const auto& r : records) {
        if (r.image_id == image_id) return &r;
    }
    return nullptr;
}

}  // namespace hipcap
