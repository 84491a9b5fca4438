#include "crs/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace crs {

using nlohmann::json;

namespace {

void write_json(const json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

json read_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
    json j;
    in >> j;
    return j;
}

void check_header(const json& j, const std::string& kind) {
    if (j.at("schema_version").get<int>() != kCheckpointSchemaVersion)
        throw std::runtime_error("checkpoint: unsupported schema_version");
    if (j.at("kind").get<std::string>() != kind)
        throw std::runtime_error("checkpoint: expected kind \"" + kind + "\"");
}

}  // namespace

void save_policy(const PolicyParams& p, const std::string& path, std::uint64_t seed) {
    json j;
    j["schema_version"] = kCheckpointSchemaVersion;
    j["kind"] = "policy";
    j["seed"] = seed;
    j["dims"] = {{"input_dim", p.input_dim},
                 {"hidden_dim", p.hidden_dim},
                 {"catalog_size", p.catalog_size},
                 {"template_count", p.template_count}};
    j["weights"] = {{"encoder_w", p.encoder_w}, {"encoder_b", p.encoder_b},
                    {"item_w", p.item_w},       {"item_b", p.item_b},
                    {"template_w", p.template_w}, {"template_b", p.template_b},
                    {"value_w", p.value_w},     {"value_b", p.value_b}};
    write_json(j, path);
}

PolicyParams load_policy(const std::string& path) {
    json j = read_json(path);
    check_header(j, "policy");
    PolicyParams p;
    const auto& d = j.at("dims");
    p.input_dim = d.at("input_dim").get<int>();
    p.hidden_dim = d.at("hidden_dim").get<int>();
    p.catalog_size = d.at("catalog_size").get<int>();
    p.template_count = d.at("template_count").get<int>();
    const auto& w = j.at("weights");
    p.encoder_w = w.at("encoder_w").get<std::vector<double>>();
    p.encoder_b = w.at("encoder_b").get<std::vector<double>>();
    p.item_w = w.at("item_w").get<std::vector<double>>();
    p.item_b = w.at("item_b").get<std::vector<double>>();
    p.template_w = w.at("template_w").get<std::vector<double>>();
    p.template_b = w.at("template_b").get<std::vector<double>>();
    p.value_w = w.at("value_w").get<std::vector<double>>();
    p.value_b = w.at("value_b").get<double>();
    p.check_finite();
    return p;
}

void save_reward_model(const RewardModel& m, const std::string& path, std::uint64_t seed) {
    json j;
    j["schema_version"] = kCheckpointSchemaVersion;
    j["kind"] = "reward";
    j["seed"] = seed;
    j["dims"] = {{"input_dim", RewardModel::kInputDim}, {"hidden_dim", m.hidden_dim}};
    j["weights"] = {{"w1", m.w1}, {"b1", m.b1}, {"w2", m.w2}, {"b2", m.b2}};
    write_json(j, path);
}

RewardModel load_reward_model(const std::string& path) {
    json j = read_json(path);
    check_header(j, "reward");
    RewardModel m;
    m.hidden_dim = j.at("dims").at("hidden_dim").get<int>();
    const auto& w = j.at("weights");
    m.w1 = w.at("w1").get<std::vector<double>>();
    m.b1 = w.at("b1").get<std::vector<double>>();
    m.w2 = w.at("w2").get<std::vector<double>>();
    m.b2 = w.at("b2").get<double>();
    m.check_finite();
    return m;
}

}  // namespace crs
