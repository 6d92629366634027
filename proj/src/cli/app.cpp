#include "rhognf/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "rhognf/causal.hpp"
#include "rhognf/dgp.hpp"
#include "rhognf/errors.hpp"
#include "rhognf/io.hpp"
#include "rhognf/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace rhognf {

namespace {

struct Common {
    std::string out_dir = ".";
    std::string name;
    std::uint64_t seed = 0;
};

struct TrainFlags {
    int batch_size = 128;
    double learning_rate = 3e-4;
    int max_epochs = 200;
    int patience = 20;
    int bins = 8;
    std::string activation = "tanh";

    TrainConfig config(std::uint64_t seed) const {
        TrainConfig c;
        c.batch_size = batch_size;
        c.learning_rate = learning_rate;
        c.max_epochs = max_epochs;
        c.patience = patience;
        c.seed = seed;
        c.architecture.bins_a = bins;
        c.architecture.bins_y = bins;
        c.architecture.activation = activation_from_string(activation);
        return c;
    }
};

struct DataFlags {
    std::string path;
    std::string schema_a = "continuous";
    std::string schema_y = "continuous";
};

void add_common(CLI::App& cmd, Common& c, const std::string& default_name) {
    c.name = default_name;
    cmd.add_option("--out-dir", c.out_dir, "Output directory")->envname("RHOGNF_OUTPUT_DIR")->capture_default_str();
    cmd.add_option("--name", c.name, "Stem of the output files")->capture_default_str();
    cmd.add_option("--seed", c.seed, "Master seed")->capture_default_str();
}

void add_train(CLI::App& cmd, TrainFlags& t) {
    cmd.add_option("--batch-size", t.batch_size)->capture_default_str()->check(CLI::PositiveNumber);
    cmd.add_option("--lr", t.learning_rate, "Adam learning rate")->capture_default_str()->check(CLI::PositiveNumber);
    cmd.add_option("--max-epochs", t.max_epochs)->capture_default_str()->check(CLI::PositiveNumber);
    cmd.add_option("--patience", t.patience)->capture_default_str()->check(CLI::PositiveNumber);
    cmd.add_option("--bins", t.bins, "Spline bins for both transforms")->capture_default_str()->check(CLI::PositiveNumber);
    cmd.add_option("--activation", t.activation)->capture_default_str()->check(CLI::IsMember({"tanh", "sigmoid"}));
}

void add_data(CLI::App& cmd, DataFlags& d) {
    cmd.add_option("--data", d.path, "Dataset CSV with header a,y")->required();
    cmd.add_option("--schema-a", d.schema_a, "continuous or discrete:K")->capture_default_str();
    cmd.add_option("--schema-y", d.schema_y, "continuous or discrete:K")->capture_default_str();
}

// Output naming does not enter the hash, so renamed runs stay comparable.
Provenance provenance(const CLI::App& cmd, std::uint64_t seed) {
    std::istringstream all(cmd.config_to_str(true, false));
    std::string hashed = cmd.get_name() + "\n";
    for (std::string line; std::getline(all, line);) {
        if (line.rfind("name=", 0) == 0 || line.rfind("out-dir=", 0) == 0) continue;
        hashed += line + "\n";
    }
    return {cmd.get_name(), fnv1a(hashed), seed};
}

fs::path out_path(const Common& c, const std::string& suffix) { return fs::path(c.out_dir) / (c.name + suffix); }

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// Seeds for the dequantization noise, separate from the fit's own streams.
Rng ingest_rng(std::uint64_t seed) {
    std::seed_seq seq{seed, std::uint64_t{0xdeca1}};
    return Rng(seq);
}

Dataset load(const DataFlags& d, std::uint64_t seed, VariableCoding& coding) {
    const auto a = ColumnSchema::parse(d.schema_a);
    const auto y = ColumnSchema::parse(d.schema_y);
    coding = {a.discrete, y.discrete};
    Rng rng = ingest_rng(seed);
    return ingest(read_csv(d.path), a, y, rng);
}

Table dataset_table(const Dataset& d) {
    Table t;
    t.header = {"a", "y"};
    t.rows.reserve(d.size());
    for (const auto& o : d) t.rows.push_back({o.a, o.y});
    return t;
}

json bounds_json(const BinaryObsStats& s) {
    return {{"p1", s.p1}, {"p0", s.p0}, {"q1", s.q1}, {"q0", s.q0}, {"af_bounds", to_json(af_bounds(s))}};
}

// ---------------------------------------------------------------- simulate

struct SimulateFlags {
    Common common;
    int table1_row = 0;
    std::string dgp_file;
    bool binary = false;
    bool categorical = false;
    int dimensions = 7;
    std::size_t n = 0;
};

void cmd_simulate(const CLI::App& cmd, const SimulateFlags& f, std::ostream& out) {
    const int sources = (f.table1_row != 0) + !f.dgp_file.empty() + f.binary + f.categorical;
    if (sources != 1) {
        throw InvalidParameter("simulate needs exactly one of --table1-row, --dgp-file, --binary, --categorical");
    }
    if (f.n == 0) throw InvalidParameter("--n must be positive");
    Rng rng(f.common.seed);
    DgpSpec spec;
    if (f.table1_row != 0) {
        if (f.table1_row < 1 || f.table1_row > 6) throw InvalidParameter("--table1-row must lie in 1..6");
        spec = table1_rows()[static_cast<std::size_t>(f.table1_row - 1)].params;
    } else if (!f.dgp_file.empty()) {
        spec = parse_dgp(read_text(f.dgp_file));
    } else if (f.binary) {
        spec = random_binary_dgp(rng);
    } else {
        if (f.dimensions < 1) throw InvalidParameter("--dimensions must be positive");
        spec = random_categorical_dgp(rng, static_cast<std::size_t>(f.dimensions));
    }

    const Provenance prov = provenance(cmd, f.common.seed);
    json side = {{"provenance", to_json(prov)}, {"dgp", format_dgp(spec)}, {"n", f.n}, {"true_ace", true_ace(spec)}};
    Dataset data;
    if (const auto* lin = std::get_if<LinearScmParams>(&spec)) {
        data = sample_linear_scm(*lin, f.n, rng);
        side["schema"] = {{"a", "continuous"}, {"y", "continuous"}};
        side["observed_correlation"] = lin->observed_correlation();
        side["noise_correlation"] = lin->noise_correlation();
    } else if (const auto* bin = std::get_if<BinaryDgpParams>(&spec)) {
        data = sample_binary_dgp(*bin, f.n, rng);
        side["schema"] = {{"a", "discrete:2"}, {"y", "discrete:2"}};
        side["exact"] = bounds_json(exact_obs_stats(*bin));
        side["af_bounds"] = side["exact"]["af_bounds"];
        if (f.n >= 2) {
            try {
                side["empirical"] = bounds_json(empirical_obs_stats(data));
            } catch (const InvalidInput&) {
                side["empirical"] = nullptr;  // one arm empty
            }
        }
    } else {
        const auto& cat = std::get<CategoricalDgpParams>(spec);
        const auto sample = sample_categorical_dgp(cat, f.n, rng);
        data = sample.observations;
        side["schema"] = {{"a", "discrete:2"}, {"y", "discrete:" + std::to_string(cat.dimensions() + 1)}};
        std::vector<BinaryObsStats> exact;
        for (std::size_t d = 0; d < cat.dimensions(); ++d) exact.push_back(exact_obs_stats(cat.dimension(d)));
        side["af_bounds"] = to_json(categorical_af_bounds(exact));
        Table dims;
        dims.header = {"a"};
        for (std::size_t d = 0; d < cat.dimensions(); ++d) dims.header.push_back("d" + std::to_string(d + 1));
        for (std::size_t i = 0; i < f.n; ++i) {
            std::vector<double> row{data[i].a};
            for (std::size_t d = 0; d < cat.dimensions(); ++d) row.push_back(sample.dimension[d][i]);
            dims.rows.push_back(std::move(row));
        }
        write_csv(out_path(f.common, "_dims.csv"), dims, prov);
        side["dimensions_file"] = (f.common.name + "_dims.csv");
    }
    write_csv(out_path(f.common, ".csv"), dataset_table(data), prov);
    write_json(out_path(f.common, ".json"), side);
    out << "wrote " << f.n << " rows to " << out_path(f.common, ".csv").string() << " (true ACE "
        << side["true_ace"].get<double>() << ")\n";
}

// --------------------------------------------------------------------- fit

struct FitFlags {
    Common common;
    DataFlags data;
    TrainFlags train;
    double rho = 0.0;
};

void cmd_fit(const CLI::App& cmd, const FitFlags& f, std::ostream& out) {
    if (!(std::abs(f.rho) < 1.0)) throw InvalidParameter("--rho must lie strictly inside (-1, 1)");
    VariableCoding coding;
    const Dataset data = load(f.data, f.common.seed, coding);
    TrainConfig tc = f.train.config(f.common.seed);
    tc.rho = f.rho;
    const FitReport report = fit(data, tc);
    const Provenance prov = provenance(cmd, f.common.seed);
    json j = to_json(report);
    j["provenance"] = to_json(prov);
    j["schema"] = {{"a", f.data.schema_a}, {"y", f.data.schema_y}};
    j["params_file"] = f.common.name + ".params";
    write_json(out_path(f.common, "_fit.json"), j);
    std::ostringstream params;
    params << prov.comment_line() << '\n';
    save_params(report.final_params, params);
    write_text(out_path(f.common, ".params"), params.str());
    out << "rho " << report.rho << ": train " << report.train_nll << ", val " << report.val_nll << ", test "
        << report.test_nll << " after " << report.epochs_run << " epochs (best " << report.best_epoch << ")\n";
}

// ------------------------------------------------------------------- sweep

struct SweepFlags {
    Common common;
    DataFlags data;
    TrainFlags train;
    std::vector<double> grid = default_rho_grid();
    std::size_t n_samples = kDefaultMcSamples;
    double a1 = 1.0;
    double a0 = 0.0;
    unsigned threads = 0;
    int binary_batch = 0;
    std::size_t n = 20000;
};

SweepConfig sweep_config(const SweepFlags& f, std::uint64_t seed, const VariableCoding& coding) {
    SweepConfig c;
    c.grid = f.grid;
    c.train = f.train.config(seed);
    c.n_samples = f.n_samples;
    c.a1 = f.a1;
    c.a0 = f.a0;
    c.coding = coding;
    c.threads = f.threads;
    return c;
}

void cmd_sweep_batch(const CLI::App& cmd, const SweepFlags& f, std::ostream& out) {
    const Provenance prov = provenance(cmd, f.common.seed);
    const DequantSpec bit{2, 0.1};
    Rng master(f.common.seed);
    std::vector<BinaryDgpParams> dgps;
    for (int k = 0; k < f.binary_batch; ++k) dgps.push_back(random_binary_dgp(master));

    json per = json::array();
    double width_sum = 0.0;
    int contained = 0;
    int inside_af = 0;
    for (int k = 0; k < f.binary_batch; ++k) {
        const auto& p = dgps[static_cast<std::size_t>(k)];
        const std::uint64_t seed = f.common.seed + static_cast<std::uint64_t>(k) + 1;
        Rng rng(seed);
        const Dataset raw = sample_binary_dgp(p, f.n, rng);
        Dataset data = raw;
        Rng enc = ingest_rng(seed);
        for (auto& o : data) {
            o.a = encode(bit, static_cast<int>(o.a), enc);
            o.y = encode(bit, static_cast<int>(o.y), enc);
        }
        const RhoCurve curve = sweep_rho_curve(data, sweep_config(f, seed, {bit, bit}));
        const double truth = binary_true_ace(p);
        const AceBounds af = af_bounds(exact_obs_stats(p));
        const bool in = curve.bounds.lower <= truth && truth <= curve.bounds.upper;
        const bool within = af.lower <= curve.bounds.lower && curve.bounds.upper <= af.upper;
        contained += in;
        inside_af += within;
        width_sum += curve.bounds.width();
        const std::string stem = "_dgp" + std::to_string(k);
        write_csv(out_path(f.common, stem + "_curve.csv"), curve_table(curve), prov);
        per.push_back({{"index", k},
                       {"seed", seed},
                       {"dgp", format_dgp(p)},
                       {"true_ace", truth},
                       {"af_bounds", to_json(af)},
                       {"bounds", to_json(curve.bounds)},
                       {"contains_true_ace", in},
                       {"within_af_bounds", within},
                       {"curve_file", f.common.name + stem + "_curve.csv"}});
        out << "dgp " << k << ": true " << truth << ", bounds [" << curve.bounds.lower << ", " << curve.bounds.upper
            << "]" << (in ? "" : " (misses)") << '\n';
    }
    const double mean_width = width_sum / f.binary_batch;
    json summary = {{"provenance", to_json(prov)},
                    {"n", f.n},
                    {"dgps", per},
                    {"contained", contained},
                    {"within_af", inside_af},
                    {"count", f.binary_batch},
                    {"mean_width", mean_width}};
    write_json(out_path(f.common, "_batch.json"), summary);
    out << contained << "/" << f.binary_batch << " contain the true ACE, mean width " << mean_width << '\n';
}

void cmd_sweep(const CLI::App& cmd, const SweepFlags& f, std::ostream& out) {
    if (f.binary_batch > 0) {
        cmd_sweep_batch(cmd, f, out);
        return;
    }
    if (f.data.path.empty()) throw InvalidParameter("sweep needs --data or --binary-batch");
    VariableCoding coding;
    const Dataset data = load(f.data, f.common.seed, coding);
    const RhoCurve curve = sweep_rho_curve(data, sweep_config(f, f.common.seed, coding));
    const Provenance prov = provenance(cmd, f.common.seed);
    json j = to_json(curve);
    j["provenance"] = to_json(prov);
    j["schema"] = {{"a", f.data.schema_a}, {"y", f.data.schema_y}};
    j["interventions"] = {{"a1", f.a1}, {"a0", f.a0}};
    write_json(out_path(f.common, "_curve.json"), j);
    write_csv(out_path(f.common, "_curve.csv"), curve_table(curve), prov);
    out << "bounds [" << curve.bounds.lower << ", " << curve.bounds.upper << "], rho_value " << curve.rho_value_closed;
    if (curve.rho_value_intercept) out << " (curve crossing " << *curve.rho_value_intercept << ")";
    out << '\n';
}

// ------------------------------------------------------------------ bounds

struct BoundsFlags {
    Common common;
    std::string path;
};

std::vector<int> binary_column(const Table& t, std::size_t c) {
    std::vector<int> v;
    v.reserve(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const double x = t.rows[i][c];
        if (x != 0.0 && x != 1.0) {
            throw DataError("column " + t.header[c] + " is not binary (row " + std::to_string(i + 1) + ")");
        }
        v.push_back(static_cast<int>(x));
    }
    return v;
}

void cmd_bounds(const CLI::App& cmd, const BoundsFlags& f, std::ostream& out) {
    const Table t = read_csv(f.path);
    if (t.header.size() < 2 || t.header[0] != "a") throw DataError("bounds needs columns a,y or a,d1..dk", 1);
    const auto a = binary_column(t, 0);
    json j = {{"provenance", to_json(provenance(cmd, f.common.seed))}, {"n", t.rows.size()}};
    auto stats = [&](std::size_t c) {
        try {
            return empirical_obs_stats(a, binary_column(t, c));
        } catch (const InvalidInput& e) {
            throw DataError(e.what());
        }
    };
    if (t.header.size() == 2 && t.header[1] == "y") {
        const auto s = stats(1);
        j.update(bounds_json(s));
        const auto b = af_bounds(s);
        out << "AF bounds [" << b.lower << ", " << b.upper << "]\n";
    } else {
        json dims = json::array();
        std::vector<BinaryObsStats> all;
        for (std::size_t c = 1; c < t.header.size(); ++c) {
            all.push_back(stats(c));
            json d = bounds_json(all.back());
            d["column"] = t.header[c];
            dims.push_back(d);
        }
        const auto total = categorical_af_bounds(all);
        j["dimensions"] = dims;
        j["summed_af_bounds"] = to_json(total);
        out << "summed AF bounds over " << all.size() << " dimensions [" << total.lower << ", " << total.upper
            << "]\n";
    }
    write_json(out_path(f.common, "_bounds.json"), j);
}

// ------------------------------------------------------------------ report

struct ReportFlags {
    Common common;
    std::vector<std::string> curves;
};

void cmd_report(const CLI::App& cmd, const ReportFlags& f, std::ostream& out) {
    Table merged;
    merged.header = {"curve", "rho", "ace", "ey1", "ey0", "lower", "upper"};
    for (std::size_t k = 0; k < f.curves.size(); ++k) {
        json j;
        try {
            j = json::parse(read_text(f.curves[k]));
            const auto& b = j.at("bounds");
            for (const auto& p : j.at("points")) {
                merged.rows.push_back({static_cast<double>(k), p.at("rho").get<double>(), p.at("ace").get<double>(),
                                       p.at("ey1").get<double>(), p.at("ey0").get<double>(),
                                       b.at("lower").get<double>(), b.at("upper").get<double>()});
            }
        } catch (const json::exception& e) {
            throw DataError(f.curves[k] + ": not a curve report (" + e.what() + ")");
        }
    }
    write_csv(out_path(f.common, "_report.csv"), merged, provenance(cmd, f.common.seed));
    json index = json::array();
    for (std::size_t k = 0; k < f.curves.size(); ++k) index.push_back({{"curve", k}, {"file", f.curves[k]}});
    write_json(out_path(f.common, "_report.json"),
               {{"provenance", to_json(provenance(cmd, f.common.seed))}, {"curves", index}});
    out << "merged " << merged.rows.size() << " rows from " << f.curves.size() << " curves\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"rho-GNF sensitivity analysis"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML/INI file supplying defaults; flags override");

    SimulateFlags sim;
    auto* simulate = app.add_subcommand("simulate", "Sample a benchmark dataset");
    add_common(*simulate, sim.common, "data");
    simulate->add_option("--table1-row", sim.table1_row, "Linear SCM row 1..6");
    simulate->add_option("--dgp-file", sim.dgp_file, "DGP spec in key = value form");
    simulate->add_flag("--binary", sim.binary, "Random binary confounded DGP drawn from the seed");
    simulate->add_flag("--categorical", sim.categorical, "Random multi-dimension binary DGP, summed outcome");
    simulate->add_option("--dimensions", sim.dimensions, "Dimensions of --categorical")->capture_default_str();
    simulate->add_option("--n", sim.n, "Number of rows")->required();

    FitFlags fitf;
    auto* fitc = app.add_subcommand("fit", "Fit the flow at one rho");
    add_common(*fitc, fitf.common, "model");
    add_data(*fitc, fitf.data);
    add_train(*fitc, fitf.train);
    fitc->add_option("--rho", fitf.rho, "Copula correlation in (-1, 1)")->required();

    SweepFlags sw;
    auto* sweep = app.add_subcommand("sweep", "Fit over a rho grid and estimate the ACE curve");
    add_common(*sweep, sw.common, "sweep");
    sweep->add_option("--data", sw.data.path, "Dataset CSV with header a,y");
    sweep->add_option("--schema-a", sw.data.schema_a)->capture_default_str();
    sweep->add_option("--schema-y", sw.data.schema_y)->capture_default_str();
    add_train(*sweep, sw.train);
    sweep->add_option("--grid", sw.grid, "Comma-separated rho values")->delimiter(',')->capture_default_str();
    sweep->add_option("--n-samples", sw.n_samples, "Monte Carlo draws per arm")->capture_default_str();
    sweep->add_option("--a1", sw.a1)->capture_default_str();
    sweep->add_option("--a0", sw.a0)->capture_default_str();
    sweep->add_option("--threads", sw.threads, "0 = hardware concurrency")->capture_default_str();
    sweep->add_option("--binary-batch", sw.binary_batch, "Sweep this many random binary DGPs instead of --data");
    sweep->add_option("--n", sw.n, "Rows per DGP in batch mode")->capture_default_str();

    BoundsFlags bf;
    auto* bounds = app.add_subcommand("bounds", "Assumption-free bounds of binary data");
    add_common(*bounds, bf.common, "bounds");
    bounds->add_option("--data", bf.path, "CSV a,y or a,d1..dk of 0/1 values")->required();

    ReportFlags rf;
    auto* report = app.add_subcommand("report", "Merge curve reports into one table");
    add_common(*report, rf.common, "report");
    report->add_option("--curves", rf.curves, "Curve JSON files")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*simulate) cmd_simulate(*simulate, sim, out);
        if (*fitc) cmd_fit(*fitc, fitf, out);
        if (*sweep) cmd_sweep(*sweep, sw, out);
        if (*bounds) cmd_bounds(*bounds, bf, out);
        if (*report) cmd_report(*report, rf, out);
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const InvalidParameter& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InvalidInput& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        // DivergedFit, SweepError, InversionFailure, DegenerateCopula
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitOk;
}

}  // namespace rhognf
