#include "mdcms/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mdcms {

double round12(double v) {
    if (!std::isfinite(v)) return v;
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::strtod(buf, nullptr);
}

json subset_to_json(const DescriptionSet& s) {
    json out = json::array();
    for (int l : s.members()) out.push_back(l);
    return out;
}

std::string subset_key(const DescriptionSet& s) { return subset_to_json(s).dump(); }

DescriptionSet subset_from_json(const json& j, int total) {
    if (!j.is_array()) throw std::invalid_argument("subset must be a JSON array");
    std::vector<int> members;
    for (const auto& e : j) members.push_back(e.get<int>());
    return DescriptionSet::from_members(members, total);
}

DescriptionSet subset_from_key(const std::string& key, int total) {
    return subset_from_json(json::parse(key), total);
}

json distribution_to_json(const JointDistribution& dist) {
    json vars = json::array();
    for (const auto& v : dist.variables())
        vars.push_back({{"name", v.name}, {"alphabet", v.alphabet}});
    json probs = json::array();
    for (double p : dist.probs()) probs.push_back(round12(p));
    return {{"variables", vars}, {"probs", probs}};
}

JointDistribution distribution_from_json(const json& j) {
    if (!j.contains("variables") || !j.contains("probs"))
        throw std::invalid_argument("distribution JSON needs 'variables' and 'probs'");
    std::vector<VariableSpec> vars;
    for (const auto& v : j.at("variables"))
        vars.push_back({v.at("name").get<std::string>(), v.at("alphabet").get<int>()});
    std::vector<double> probs;
    for (const auto& p : j.at("probs")) probs.push_back(p.get<double>());
    return JointDistribution(std::move(vars), std::move(probs));
}

json model_to_json(const AuxModel& model) {
    json j = distribution_to_json(model.joint());
    j["L"] = model.total();
    j["scheme"] = to_string(model.scheme());
    j["source"] = model.source_name();
    json roles = json::array();
    for (const auto& [s, name] : model.shared_vars())
        roles.push_back({{"name", name}, {"kind", "shared"}, {"subset", subset_to_json(s)}});
    for (const auto& [k, name] : model.aux_vars())
        roles.push_back({{"name", name},
                         {"kind", k.cardinality() == 1 ? "private" : "refinement"},
                         {"subset", subset_to_json(k)}});
    j["roles"] = roles;
    if (!model.distortions().empty()) {
        json d = json::object();
        for (const auto& [s, m] : model.distortions()) {
            json rows = json::array();
            for (const auto& row : m.matrix) {
                json r = json::array();
                for (double v : row) r.push_back(round12(v));
                rows.push_back(r);
            }
            d[subset_key(s)] = {{"alphabet", m.reconstruction_alphabet}, {"matrix", rows}};
        }
        j["distortions"] = d;
    }
    j["vkg_last_term_conditions_on_shared"] = model.vkg_last_term_conditions_on_shared();
    return j;
}

AuxModel model_from_json(const json& j) {
    const int total = j.at("L").get<int>();
    const Scheme scheme = scheme_from_string(j.at("scheme").get<std::string>());
    JointDistribution joint = distribution_from_json(j);
    const std::string source = j.value("source", std::string("X"));

    std::map<DescriptionSet, std::string> shared, aux;
    if (!j.contains("roles")) throw std::invalid_argument("model JSON needs 'roles'");
    for (const auto& role : j.at("roles")) {
        const std::string name = role.at("name").get<std::string>();
        const std::string kind = role.at("kind").get<std::string>();
        const DescriptionSet subset = subset_from_json(role.at("subset"), total);
        if (kind == "shared") {
            if (shared.count(subset))
                throw std::invalid_argument("duplicate shared role for subset " +
                                            subset_key(subset));
            shared[subset] = name;
        } else if (kind == "private" || kind == "refinement") {
            if (kind == "private" && subset.cardinality() != 1)
                throw std::invalid_argument("private role must bind a singleton subset");
            if (kind == "refinement" && subset.cardinality() < 2)
                throw std::invalid_argument("refinement role must bind a subset of size >= 2");
            if (aux.count(subset))
                throw std::invalid_argument("duplicate private/refinement role for subset " +
                                            subset_key(subset));
            aux[subset] = name;
        } else {
            throw std::invalid_argument("unknown role kind '" + kind + "'");
        }
    }

    std::map<DescriptionSet, DistortionMeasure> distortions;
    if (j.contains("distortions")) {
        for (const auto& [key, val] : j.at("distortions").items()) {
            DistortionMeasure m;
            m.reconstruction_alphabet = val.at("alphabet").get<int>();
            for (const auto& row : val.at("matrix"))
                m.matrix.push_back(row.get<std::vector<double>>());
            distortions[subset_from_key(key, total)] = std::move(m);
        }
    }

    return AuxModel(total, scheme, std::move(joint), source, std::move(shared),
                    std::move(aux), std::move(distortions),
                    j.value("vkg_last_term_conditions_on_shared", true));
}

AuxModel load_model(const std::string& path) {
    try {
        return model_from_json(load_json_file(path));
    } catch (const std::exception& e) {
        throw std::invalid_argument("model file '" + path + "': " + e.what());
    }
}

json rates_report_to_json(const MinRatesResult& result) {
    json j;
    json rates = json::array();
    for (double r : result.rates) rates.push_back(round12(r));
    j["rates"] = rates;
    j["objective"] = round12(result.objective);
    if (result.allocation) {
        json priv = json::object(), shared = json::object();
        for (const auto& [l, r] : result.allocation->private_rates)
            priv[std::to_string(l)] = round12(r);
        for (const auto& [s, r] : result.allocation->shared_rates)
            shared[subset_key(s)] = round12(r);
        j["allocation"] = {{"private", priv}, {"shared", shared}};
    }
    if (!result.distortions.empty()) {
        json d = json::object();
        for (const auto& [s, v] : result.distortions) d[subset_key(s)] = round12(v);
        j["distortions"] = d;
    }
    return j;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    json j;
    in >> j;
    return j;
}

void save_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << j.dump(2) << "\n";
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char c;
    while (in.get(c)) {
        h ^= std::uint64_t(static_cast<unsigned char>(c));
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace mdcms
