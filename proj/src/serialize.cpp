#include "strokegen/serialize.hpp"

#include <fstream>

#include "strokegen/error.hpp"

namespace strokegen {

using nlohmann::json;

json tensor_to_json(const Tensor& t) {
    if (!t.all_finite()) fail("state", "refusing to serialize a non-finite tensor");
    json j;
    j["shape"] = t.shape;
    j["data"] = t.data;
    return j;
}

Tensor tensor_from_json(const json& j) {
    if (!j.is_object() || !j.contains("shape") || !j.contains("data"))
        fail("format", "tensor record needs shape and data");
    Tensor t(j["shape"].get<std::vector<std::size_t>>(),
             j["data"].get<std::vector<double>>());
    if (!t.all_finite()) fail("format", "tensor record holds non-finite values");
    return t;
}

json params_to_json(const ParamStore& store) {
    json arr = json::array();
    for (const auto& [name, entry] : store) {
        json rec;
        rec["name"] = name;
        rec["shape"] = entry.value.shape;
        rec["value"] = entry.value.data;
        rec["adam_m"] = entry.adam_m.data;
        rec["adam_v"] = entry.adam_v.data;
        arr.push_back(std::move(rec));
    }
    json j;
    j["step_count"] = store.step_count();
    j["entries"] = std::move(arr);
    return j;
}

void params_from_json(const json& j, ParamStore& store) {
    if (!j.contains("entries")) fail("format", "parameter record needs entries");
    for (const auto& rec : j["entries"]) {
        const std::string name = rec.at("name").get<std::string>();
        const auto shape = rec.at("shape").get<std::vector<std::size_t>>();
        Tensor value(shape, rec.at("value").get<std::vector<double>>());
        Tensor& v = store.create(name, std::move(value));
        (void)v;
        ParamEntry& e = store.entry(name);
        e.adam_m = Tensor(shape, rec.at("adam_m").get<std::vector<double>>());
        e.adam_v = Tensor(shape, rec.at("adam_v").get<std::vector<double>>());
        if (!e.value.all_finite() || !e.adam_m.all_finite() || !e.adam_v.all_finite())
            fail("format", "parameter '" + name + "' holds non-finite values");
    }
    store.set_step_count(j.value("step_count", std::uint64_t{0}));
}

json quantizer_to_json(const QuantizerSpec& spec) {
    json j;
    j["direction_levels"] = spec.direction_levels;
    j["edges"] = spec.speed_bin_edges;
    j["centers"] = spec.speed_bin_centers;
    return j;
}

QuantizerSpec quantizer_from_json(const json& j) {
    QuantizerSpec spec;
    spec.direction_levels = j.at("direction_levels").get<int>();
    spec.speed_bin_edges = j.at("edges").get<std::vector<double>>();
    spec.speed_bin_centers = j.at("centers").get<std::vector<double>>();
    spec.validate();
    return spec;
}

void write_json_file(const json& j, const std::string& path, int indent) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("io", "cannot write " + path);
    out << j.dump(indent);
    out << "\n";
    if (!out) fail("io", "failed while writing " + path);
}

json read_json_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("io", "cannot read " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        fail("format", path + ": " + e.what());
    }
}

}  // namespace strokegen
