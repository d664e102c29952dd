// Command-line front end: model evaluation, RD baselines, cross-section and
// separation experiments, and the finite-blocklength simulator.
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mdcms/json_io.hpp"
#include "mdcms/regions.hpp"
#include "mdcms/search.hpp"
#include "mdcms/shannon.hpp"
#include "mdcms/sim.hpp"

namespace {

constexpr const char* kVersion = "mdcms 1.0.0";

using mdcms::json;

std::string iso_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Primary outputs must be byte-identical across reruns, so timestamps and
// wall times live in a sidecar manifest, never in the output file itself.
struct Manifest {
    std::string subcommand;
    json config = json::object();
    std::map<std::string, std::string> input_digests;
    std::string started = iso_utc_now();

    void write_for(const std::string& out_path) const {
        json j;
        j["tool"] = kVersion;
        j["subcommand"] = subcommand;
        j["config"] = config;
        json inputs = json::object();
        for (const auto& [path, digest] : input_digests) inputs[path] = digest;
        j["inputs"] = inputs;
        j["started"] = started;
        j["finished"] = iso_utc_now();
        mdcms::save_json_file(out_path + ".manifest.json", j);
    }
};

void emit(const json& j, const std::string& out_path, Manifest& manifest) {
    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        mdcms::save_json_file(out_path, j);
        manifest.write_for(out_path);
    }
}

std::vector<double> parse_weights(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    if (out.empty()) throw std::invalid_argument("empty weight list");
    return out;
}

std::vector<double> parse_grid(const std::string& text) {
    // a:b:step inclusive sweep
    double a = 0, b = 0, step = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &a, &b, &step) != 3 || step <= 0.0)
        throw std::invalid_argument("grid must be a:b:step with step > 0");
    std::vector<double> out;
    for (int i = 0;; ++i) {
        const double d = a + i * step;
        if (d > b + 1e-12) break;
        out.push_back(d);
    }
    if (out.empty()) throw std::invalid_argument("empty grid");
    return out;
}

std::string format_sig(double v, int digits) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

json trace_to_json(const std::vector<mdcms::RestartTrace>& trace) {
    json out = json::array();
    for (const auto& t : trace)
        out.push_back({{"restart", t.restart},
                       {"value", mdcms::round12(t.value)},
                       {"feasible", t.feasible}});
    return out;
}

json curve_to_json(const std::vector<mdcms::SeparationCurvePoint>& curve) {
    json out = json::array();
    for (const auto& p : curve)
        out.push_back({{"D", mdcms::round12(p.distortion)},
                       {"value_ec", mdcms::round12(p.value_ec)},
                       {"value_zb", mdcms::round12(p.value_zb)},
                       {"gap", mdcms::round12(p.gap)}});
    return out;
}

json separation_report_to_json(const mdcms::SeparationReport& rep) {
    json j;
    j["D_star"] = mdcms::round12(rep.d_star);
    j["value_ec"] = mdcms::round12(rep.value_ec);
    j["value_zb"] = mdcms::round12(rep.value_cms_or_zb);
    j["gap"] = mdcms::round12(rep.gap);
    j["curve"] = curve_to_json(rep.curve);
    j["per_restart_trace"] = trace_to_json(rep.per_restart_trace);
    if (rep.best_model) j["best_model"] = mdcms::model_to_json(*rep.best_model);
    return j;
}

void write_curve_csv(const std::string& path,
                     const std::vector<mdcms::SeparationCurvePoint>& curve) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << "D,value_ec,value_zb,gap\n";
    for (const auto& p : curve)
        out << format_sig(p.distortion, 12) << "," << format_sig(p.value_ec, 12) << ","
            << format_sig(p.value_zb, 12) << "," << format_sig(p.gap, 12) << "\n";
}

struct CommonSearchFlags {
    std::uint64_t seed = 0;
    int restarts = 64;
    int jobs = 0;

    mdcms::SearchConfig config() const {
        mdcms::SearchConfig cfg;
        cfg.seed = seed;
        cfg.restarts = restarts;
        cfg.jobs = jobs;
        return cfg;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiple-descriptions rate-region toolkit (VKG vs CMS)"};
    app.require_subcommand(1);

    // ---- eval ----------------------------------------------------------
    std::string eval_model, eval_weights, eval_out;
    auto* eval_cmd = app.add_subcommand("eval", "minimize weighted description rates");
    eval_cmd->add_option("--model", eval_model, "model JSON")->required();
    eval_cmd->add_option("--weights", eval_weights, "comma-separated weights")->required();
    eval_cmd->add_option("--out", eval_out, "output JSON path");

    // ---- decoders ------------------------------------------------------
    std::string dec_model, dec_out;
    auto* dec_cmd = app.add_subcommand("decoders", "synthesize per-subset MAP decoders");
    dec_cmd->add_option("--model", dec_model, "model JSON")->required();
    dec_cmd->add_option("--out", dec_out, "output JSON path");

    // ---- rd ------------------------------------------------------------
    std::string rd_source = "bss", rd_grid, rd_out;
    double rd_d = -1.0;
    bool rd_ba = false;
    auto* rd_cmd = app.add_subcommand("rd", "rate-distortion baselines");
    rd_cmd->add_option("--source", rd_source, "'bss' or a source PMF JSON path");
    rd_cmd->add_option("--D", rd_d, "target distortion");
    rd_cmd->add_option("--grid", rd_grid, "a:b:step distortion sweep (CSV output)");
    rd_cmd->add_option("--out", rd_out, "output path (CSV for --grid)");
    rd_cmd->add_flag("--ba", rd_ba, "force Blahut-Arimoto even for bss");

    // ---- cross-section -------------------------------------------------
    std::string cs_kind, cs_out;
    double cs_d = 0.0;
    CommonSearchFlags cs_flags;
    auto* cs_cmd = app.add_subcommand("cross-section", "minimize R1+R2 at distortion D");
    cs_cmd->add_option("kind", cs_kind, "ec or zb")->required();
    cs_cmd->add_option("--D", cs_d, "per-description distortion budget")->required();
    cs_cmd->add_option("--seed", cs_flags.seed, "RNG seed")->required();
    cs_cmd->add_option("--restarts", cs_flags.restarts, "search restarts");
    cs_cmd->add_option("--jobs", cs_flags.jobs, "worker threads (0 = all)");
    cs_cmd->add_option("--out", cs_out, "output JSON path");

    // ---- separation ----------------------------------------------------
    std::string sep_kind, sep_grid = "0.05:0.45:0.05", sep_out, sep_csv;
    double sep_d3 = 0.2, sep_d34 = 0.05;
    CommonSearchFlags sep_flags;
    auto* sep_cmd = app.add_subcommand("separation", "EC-vs-ZB separation experiments");
    sep_cmd->add_option("kind", sep_kind, "zb, l3 or l4")->required();
    sep_cmd->add_option("--seed", sep_flags.seed, "RNG seed")->required();
    sep_cmd->add_option("--restarts", sep_flags.restarts, "search restarts");
    sep_cmd->add_option("--grid", sep_grid, "a:b:step distortion grid");
    sep_cmd->add_option("--jobs", sep_flags.jobs, "worker threads (0 = all)");
    sep_cmd->add_option("--D3", sep_d3, "coarse distortion for the L=4 assembly");
    sep_cmd->add_option("--D34", sep_d34, "fine distortion for the L=4 assembly");
    sep_cmd->add_option("--out", sep_out, "output JSON path");
    sep_cmd->add_option("--csv", sep_csv, "also write the (D, EC, ZB, gap) curve as CSV");

    // ---- sim -----------------------------------------------------------
    std::string sim_model, sim_out;
    int sim_n = 8, sim_trials = 100;
    double sim_eps = 0.15, sim_margin = 0.1;
    std::uint64_t sim_seed = 0;
    int sim_jobs = 0;
    auto* sim_cmd = app.add_subcommand("sim", "finite-blocklength random-coding trials");
    sim_cmd->add_option("--model", sim_model, "model JSON")->required();
    sim_cmd->add_option("--seed", sim_seed, "RNG seed")->required();
    sim_cmd->add_option("--n", sim_n, "blocklength (<= 12)");
    sim_cmd->add_option("--trials", sim_trials, "number of trials");
    sim_cmd->add_option("--epsilon", sim_eps, "typicality tolerance");
    sim_cmd->add_option("--margin", sim_margin,
                        "bits added to every LP-minimal allocation component");
    sim_cmd->add_option("--jobs", sim_jobs, "worker threads (0 = all)");
    sim_cmd->add_option("--out", sim_out, "output JSON path");

    // ---- lattice -------------------------------------------------------
    int lat_l = 3;
    std::string lat_k, lat_out;
    auto* lat_cmd = app.add_subcommand("lattice", "print subset families (debug)");
    lat_cmd->add_option("--L", lat_l, "description count")->required();
    lat_cmd->add_option("--K", lat_k, "comma-separated subset for J(K)");
    lat_cmd->add_option("--out", lat_out, "output JSON path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (*eval_cmd) {
            Manifest m{"eval"};
            m.config = {{"model", eval_model}, {"weights", eval_weights}};
            m.input_digests[eval_model] = mdcms::file_digest(eval_model);
            const auto model = mdcms::load_model(eval_model);
            const auto result = mdcms::regions::min_rates(model, parse_weights(eval_weights));
            emit(mdcms::rates_report_to_json(result), eval_out, m);
        } else if (*dec_cmd) {
            Manifest m{"decoders"};
            m.config = {{"model", dec_model}};
            m.input_digests[dec_model] = mdcms::file_digest(dec_model);
            const auto model = mdcms::load_model(dec_model);
            const auto synth = mdcms::regions::synthesize_decoders(model);
            json j;
            json dists = json::object(), decs = json::array();
            for (const auto& [s, d] : synth.distortions)
                dists[mdcms::subset_key(s)] = mdcms::round12(d);
            for (const auto& dec : synth.decoders)
                decs.push_back({{"subset", mdcms::subset_to_json(dec.subset)},
                                {"inputs", dec.input_names},
                                {"table", dec.table}});
            j["distortions"] = dists;
            j["decoders"] = decs;
            emit(j, dec_out, m);
        } else if (*rd_cmd) {
            Manifest m{"rd"};
            m.config = {{"source", rd_source}, {"ba", rd_ba}};
            std::vector<double> pmf{0.5, 0.5};
            std::vector<std::vector<double>> matrix{{0.0, 1.0}, {1.0, 0.0}};
            const bool bss = rd_source == "bss";
            if (!bss) {
                m.input_digests[rd_source] = mdcms::file_digest(rd_source);
                const auto dist =
                    mdcms::distribution_from_json(mdcms::load_json_file(rd_source));
                if (dist.variables().size() != 1)
                    throw std::invalid_argument("rd --source file must hold one variable");
                pmf = dist.probs();
                const int a = dist.variables()[0].alphabet;
                matrix.assign(a, std::vector<double>(a, 1.0));
                for (int i = 0; i < a; ++i) matrix[i][i] = 0.0;
            }
            auto rate_at = [&](double d) {
                if (bss && !rd_ba) return mdcms::shannon::rd_binary(d);
                return mdcms::shannon::rd_blahut_arimoto(pmf, matrix, d).rate;
            };
            if (!rd_grid.empty()) {
                if (rd_out.empty())
                    throw std::invalid_argument("rd --grid needs --out for the CSV");
                std::ofstream out(rd_out);
                if (!out) throw std::runtime_error("cannot write '" + rd_out + "'");
                out << "D,R\n";
                for (double d : parse_grid(rd_grid))
                    out << format_sig(d, 9) << "," << format_sig(rate_at(d), 9) << "\n";
                m.config["grid"] = rd_grid;
                m.write_for(rd_out);
            } else {
                if (rd_d < 0.0) throw std::invalid_argument("rd needs --D or --grid");
                std::cout << format_sig(rate_at(rd_d), 12) << "\n";
            }
        } else if (*cs_cmd) {
            Manifest m{"cross-section"};
            m.config = {{"kind", cs_kind},
                        {"D", cs_d},
                        {"seed", cs_flags.seed},
                        {"restarts", cs_flags.restarts}};
            const auto cfg = cs_flags.config();
            mdcms::CrossSectionResult res;
            if (cs_kind == "ec")
                res = mdcms::search::cross_section_ec(cs_d, cfg);
            else if (cs_kind == "zb")
                res = mdcms::search::cross_section_zb(cs_d, cfg);
            else
                throw std::invalid_argument("cross-section kind must be ec or zb");
            json j;
            j["D"] = mdcms::round12(cs_d);
            j["value"] = mdcms::round12(res.value);
            j["per_restart_trace"] = trace_to_json(res.trace);
            if (res.model) j["model"] = mdcms::model_to_json(*res.model);
            emit(j, cs_out, m);
        } else if (*sep_cmd) {
            Manifest m{"separation"};
            m.config = {{"kind", sep_kind},
                        {"seed", sep_flags.seed},
                        {"restarts", sep_flags.restarts},
                        {"grid", sep_grid}};
            const auto cfg = sep_flags.config();
            const auto grid = parse_grid(sep_grid);
            const auto zb = mdcms::search::separation_zb(cfg, grid);
            if (!sep_csv.empty()) write_curve_csv(sep_csv, zb.curve);
            if (sep_kind == "zb") {
                emit(separation_report_to_json(zb), sep_out, m);
            } else if (sep_kind == "l3") {
                const auto rep = mdcms::search::separation_l3(zb);
                json j;
                j["witness_found"] = rep.witness_found;
                if (!rep.witness_found) j["note"] = "no separation witness";
                j["D_star"] = mdcms::round12(rep.d_star);
                j["R_c"] = mdcms::round12(rep.rc);
                j["R1"] = mdcms::round12(rep.r1);
                j["R2"] = mdcms::round12(rep.r2);
                j["R3_vkg"] = mdcms::round12(rep.r3_vkg);
                j["R3_cms"] = mdcms::round12(rep.r3_cms);
                j["gap"] = mdcms::round12(rep.gap);
                if (rep.cms_model) j["cms_model"] = mdcms::model_to_json(*rep.cms_model);
                emit(j, sep_out, m);
            } else if (sep_kind == "l4") {
                m.config["D3"] = sep_d3;
                m.config["D34"] = sep_d34;
                const auto rep = mdcms::search::separation_l4(zb, sep_d3, sep_d34);
                json j;
                j["witness_found"] = rep.witness_found;
                j["D_star"] = mdcms::round12(rep.d_star);
                j["D3"] = mdcms::round12(rep.d3);
                j["D34"] = mdcms::round12(rep.d34);
                j["R3"] = mdcms::round12(rep.r3);
                j["R34"] = mdcms::round12(rep.r34);
                j["R12_cms"] = mdcms::round12(rep.r12_cms);
                j["rd_D3"] = mdcms::round12(rep.rd_d3);
                j["rd_D34"] = mdcms::round12(rep.rd_d34);
                j["R34_vkg"] = mdcms::round12(rep.r34_vkg);
                j["R12_vkg_via_ec"] = mdcms::round12(rep.r12_vkg_via_ec);
                j["gap"] = mdcms::round12(rep.gap);
                if (rep.cms_model) j["cms_model"] = mdcms::model_to_json(*rep.cms_model);
                emit(j, sep_out, m);
            } else {
                throw std::invalid_argument("separation kind must be zb, l3 or l4");
            }
        } else if (*sim_cmd) {
            Manifest m{"sim"};
            m.config = {{"model", sim_model}, {"seed", sim_seed},     {"n", sim_n},
                        {"trials", sim_trials}, {"epsilon", sim_eps}, {"margin", sim_margin}};
            m.input_digests[sim_model] = mdcms::file_digest(sim_model);
            const auto model = mdcms::load_model(sim_model);
            // allocation = LP minimum plus a uniform margin on every component
            std::vector<double> ones(std::size_t(model.total()), 1.0);
            const auto lp = mdcms::regions::min_rates(model, ones);
            mdcms::RateAllocation alloc;
            if (lp.allocation) alloc = *lp.allocation;
            for (int l = 1; l <= model.total(); ++l) alloc.private_rates[l] += sim_margin;
            for (auto& [s, r] : alloc.shared_rates) r += sim_margin;
            const auto report = mdcms::sim::run_trials(model, alloc, sim_n, sim_trials,
                                                       sim_eps, sim_seed, sim_jobs);
            json j;
            j["n"] = report.n;
            j["trials"] = report.trials;
            j["encode_failures"] = report.encode_failures;
            j["epsilon"] = mdcms::round12(report.epsilon);
            j["seed"] = report.seed;
            json emp = json::object(), ana = json::object();
            for (const auto& [s, d] : report.empirical_distortions)
                emp[mdcms::subset_key(s)] = mdcms::round12(d);
            for (const auto& [s, d] : report.analytic_distortions)
                ana[mdcms::subset_key(s)] = mdcms::round12(d);
            j["empirical_distortions"] = emp;
            j["analytic_distortions"] = ana;
            json priv = json::object(), shared = json::object();
            for (const auto& [l, r] : report.allocation_used.private_rates)
                priv[std::to_string(l)] = mdcms::round12(r);
            for (const auto& [s, r] : report.allocation_used.shared_rates)
                shared[mdcms::subset_key(s)] = mdcms::round12(r);
            j["allocation"] = {{"private", priv}, {"shared", shared}};
            emit(j, sim_out, m);
        } else if (*lat_cmd) {
            Manifest m{"lattice"};
            m.config = {{"L", lat_l}};
            json j;
            json subsets = json::array();
            for (const auto& s : mdcms::lattice::nonempty_subsets(lat_l))
                subsets.push_back(mdcms::subset_to_json(s));
            j["nonempty_subsets"] = subsets;
            json tiers = json::object();
            for (int w = 1; w <= lat_l; ++w) {
                json tier = json::array();
                for (const auto& s : mdcms::lattice::tier(lat_l, w))
                    tier.push_back(mdcms::subset_to_json(s));
                tiers[std::to_string(w)] = tier;
            }
            j["tiers"] = tiers;
            if (!lat_k.empty()) {
                std::vector<int> members;
                std::stringstream ss(lat_k);
                std::string item;
                while (std::getline(ss, item, ',')) members.push_back(std::stoi(item));
                const auto k = mdcms::DescriptionSet::from_members(members, lat_l);
                json sharing = json::array();
                for (const auto& s : mdcms::lattice::sharing_sets(lat_l, k))
                    sharing.push_back(mdcms::subset_to_json(s));
                j["sharing_sets"] = sharing;
            }
            emit(j, lat_out, m);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
