#include "pmtbn/harness.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <set>

#include <fmt/format.h>

#include "pmtbn/errors.hpp"
#include "pmtbn/inference.hpp"
#include "pmtbn/io.hpp"
#include "pmtbn/learning.hpp"
#include "pmtbn/random.hpp"

namespace pmtbn {

std::vector<std::uint64_t> default_seeds(std::size_t count) {
    std::vector<std::uint64_t> seeds(count);
    for (std::size_t i = 0; i < count; ++i) seeds[i] = i + 1;
    return seeds;
}

void StudyConfig::validate() const {
    if (n_train < 1 || n_test < 1) {
        throw InvalidArgumentError(
            fmt::format("n_train and n_test must be >= 1 (got {}, {})", n_train, n_test));
    }
    if (seeds.empty()) throw InvalidArgumentError("at least one seed is required");
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
        throw InvalidArgumentError("seeds must be distinct");
    }
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw InvalidArgumentError(fmt::format("gamma must be finite and > 0 (got {})", gamma));
    }
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw InvalidArgumentError(fmt::format("alpha must be finite and >= 0 (got {})", alpha));
    }
}

NetworkModel random_ground_truth(const Schema& schema, const Dag& dag, std::uint64_t seed,
                                 double gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw InvalidArgumentError(fmt::format("gamma must be finite and > 0 (got {})", gamma));
    }
    validate_dag(dag);
    SplitMix64 rng(seed);
    std::vector<Cpt> cpts;
    for (const auto& var : schema.variables()) {
        auto parents = parents_in_schema_order(dag, schema, var.name());
        std::vector<std::size_t> cards;
        std::size_t rows = 1;
        for (const auto& p : parents) {
            cards.push_back(schema.variable(p).cardinality());
            rows *= cards.back();
        }
        const std::size_t card = var.cardinality();
        std::vector<double> table(rows * card);
        std::vector<double> u(card);
        for (std::size_t r = 0; r < rows; ++r) {
            double sum = 0.0;
            for (std::size_t k = 0; k < card; ++k) {
                u[k] = rng.next_open_unit();
                table[r * card + k] = std::pow(u[k], gamma);
                sum += table[r * card + k];
            }
            if (sum > 0.0) {
                for (std::size_t k = 0; k < card; ++k) table[r * card + k] /= sum;
            } else {
                // Every power underflowed; the largest draw takes all the mass.
                auto best = static_cast<std::size_t>(std::max_element(u.begin(), u.end()) - u.begin());
                for (std::size_t k = 0; k < card; ++k) table[r * card + k] = k == best ? 1.0 : 0.0;
            }
        }
        cpts.emplace_back(var.name(), card, std::move(parents), std::move(cards), std::move(table));
    }
    return NetworkModel(schema, dag, std::move(cpts));
}

ExperimentData generate_experiment_data(const NetworkModel& ground_truth, std::uint64_t seed,
                                        std::size_t n_train, std::size_t n_test) {
    auto all = ancestral_sample(ground_truth, seed, n_train + n_test);
    return {all.slice(0, n_train), all.slice(n_train, n_test)};
}

double evaluate_accuracy(const NetworkModel& model, const Dataset& test,
                         std::string_view class_name) {
    if (test.empty()) throw EmptyDatasetError("cannot score an empty test set");
    if (!(test.schema() == model.schema())) {
        throw InvalidArgumentError("test data and model use different schemas");
    }
    const auto c = model.schema().index_of(class_name);
    std::size_t correct = 0;
    for (std::size_t r = 0; r < test.size(); ++r) {
        auto row = test.row(r);
        if (row[c] == kMissing) {
            throw InvalidArgumentError(fmt::format("test row {} has no class label", r + 1));
        }
        auto result = classify(model, evidence_from_row(model.schema(), row, class_name), class_name);
        if (result.state == row[c]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

double majority_class_accuracy(const Dataset& train, const Dataset& test,
                               std::string_view class_name) {
    if (test.empty()) throw EmptyDatasetError("cannot score an empty test set");
    const auto c = train.schema().index_of(class_name);
    std::vector<std::size_t> counts(train.schema().variable(c).cardinality(), 0);
    for (std::size_t r = 0; r < train.size(); ++r) {
        if (auto s = train.at(r, c); s != kMissing) ++counts[static_cast<std::size_t>(s)];
    }
    const auto majority = static_cast<StateIndex>(
        std::max_element(counts.begin(), counts.end()) - counts.begin());
    const auto tc = test.schema().index_of(class_name);
    std::size_t correct = 0;
    for (std::size_t r = 0; r < test.size(); ++r) {
        if (test.at(r, tc) == majority) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

SeedStreams derive_seed_streams(std::uint64_t seed) noexcept {
    SplitMix64 master(seed);
    SeedStreams out{};
    out.ground_truth = master.next_u64();
    out.data = master.next_u64();
    return out;
}

AccuracySummary summarize(const std::vector<double>& values) {
    AccuracySummary s;
    if (values.empty()) return s;
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

namespace {

struct StudyInputs {
    Structure structure;
    EdgeWhitelist whitelist;
    std::string class_name;
    std::optional<NetworkModel> ground_truth;
    std::string structure_source;
    std::string ground_truth_source;
};

StudyInputs resolve_inputs(const StudyConfig& config) {
    StudyInputs in;
    if (config.structure_path) {
        in.structure = parse_structure(read_text_file(*config.structure_path));
        in.structure_source = config.structure_path->string();
    } else {
        in.structure = default_pmt_structure().structure;
        in.structure_source = "builtin:pmt_default";
    }
    const auto& schema = in.structure.schema;

    if (config.whitelist_path) {
        in.whitelist = parse_whitelist(read_text_file(*config.whitelist_path), schema);
    } else {
        // The fixed structure is the endorsed edge set unless told otherwise.
        in.whitelist = EdgeWhitelist(schema, std::vector<Edge>(in.structure.dag.edges().begin(),
                                                               in.structure.dag.edges().end()));
    }

    if (config.class_name) {
        in.class_name = *config.class_name;
    } else if (in.structure.class_name) {
        in.class_name = *in.structure.class_name;
    } else {
        throw InvalidArgumentError("no class variable: pass one or add a class line to the structure");
    }
    schema.index_of(in.class_name);

    if (config.ground_truth_path) {
        auto truth = parse_model(read_text_file(*config.ground_truth_path));
        if (!(truth.schema() == schema)) {
            throw InvalidArgumentError("ground-truth model schema differs from the structure schema");
        }
        in.ground_truth = truth.with_class_name(in.class_name);
        in.ground_truth_source = config.ground_truth_path->string();
    } else {
        in.ground_truth_source = "random";
    }
    return in;
}

SeedResult run_seed(const StudyInputs& in, const StudyConfig& config, std::uint64_t seed) {
    const auto& schema = in.structure.schema;
    const auto streams = derive_seed_streams(seed);
    const NetworkModel truth =
        in.ground_truth ? *in.ground_truth
                        : random_ground_truth(schema, in.structure.dag, streams.ground_truth, config.gamma)
                              .with_class_name(in.class_name);
    const auto data = generate_experiment_data(truth, streams.data, config.n_train, config.n_test);

    const auto tan = learn_tan(data.train, schema, in.class_name, config.alpha);
    const auto fixed = estimate_cpts(in.structure.dag, schema, data.train, config.alpha)
                           .with_class_name(in.class_name);

    SeedResult r;
    r.seed = seed;
    r.tan_accuracy = evaluate_accuracy(tan, data.test, in.class_name);
    r.fixed_accuracy = evaluate_accuracy(fixed, data.test, in.class_name);
    r.oracle_accuracy = evaluate_accuracy(truth, data.test, in.class_name);
    r.majority_accuracy = majority_class_accuracy(data.train, data.test, in.class_name);
    r.tan_edges = tan.dag().edges().size();
    for (const auto& f : audit_structure(tan.dag(), in.whitelist).flagged) r.flagged.push_back(f.edge);
    return r;
}

}  // namespace

ComparisonReport run_comparison(const StudyConfig& config) {
    config.validate();
    const auto in = resolve_inputs(config);

    auto guarded = [&](std::uint64_t seed) {
        try {
            return run_seed(in, config, seed);
        } catch (const std::exception& e) {
            throw StudyError(fmt::format("seed {}: {}", seed, e.what()));
        }
    };

    std::vector<SeedResult> results;
    if (config.parallel && config.seeds.size() > 1) {
        std::vector<std::future<SeedResult>> pending;
        for (auto seed : config.seeds) pending.push_back(std::async(std::launch::async, guarded, seed));
        for (auto& f : pending) results.push_back(f.get());
    } else {
        for (auto seed : config.seeds) results.push_back(guarded(seed));
    }
    std::sort(results.begin(), results.end(),
              [](const SeedResult& a, const SeedResult& b) { return a.seed < b.seed; });

    ComparisonReport report;
    report.structure_source = in.structure_source;
    report.ground_truth_source = in.ground_truth_source;
    report.class_name = in.class_name;
    report.n_train = config.n_train;
    report.n_test = config.n_test;
    report.alpha = config.alpha;
    report.gamma = config.gamma;
    const std::size_t features = in.structure.schema.size() - 1;
    report.tan_structure_scores = features * (features - 1) / 2;
    report.fixed_structure_scores = 0;

    std::vector<double> tan, fixed, oracle, majority;
    for (const auto& r : results) {
        tan.push_back(r.tan_accuracy);
        fixed.push_back(r.fixed_accuracy);
        oracle.push_back(r.oracle_accuracy);
        majority.push_back(r.majority_accuracy);
        for (const auto& e : r.flagged) ++report.flagged_edge_seeds[e];
    }
    report.tan = summarize(tan);
    report.fixed = summarize(fixed);
    report.oracle = summarize(oracle);
    report.majority = summarize(majority);
    report.gap = report.fixed.mean - report.tan.mean;
    report.seeds = std::move(results);
    return report;
}

std::string render_comparison_table(const ComparisonReport& report) {
    auto pct = [](double v) { return 100.0 * v; };
    std::string out;
    out += fmt::format("{:<18}{:>24}\n", "Model", "% of right predictions");
    out += fmt::format("{:<18}{:>16.1f}% (sd {:.1f})\n", "Pure ML model", pct(report.tan.mean),
                       pct(report.tan.stddev));
    out += fmt::format("{:<18}{:>16.1f}% (sd {:.1f})\n", "PMT-based model", pct(report.fixed.mean),
                       pct(report.fixed.stddev));
    out += "\n";
    out += fmt::format("seeds: {}   train/test rows: {}/{}   alpha: {}   gamma: {}\n",
                       report.seeds.size(), report.n_train, report.n_test, format_real(report.alpha),
                       format_real(report.gamma));
    out += fmt::format("gap (PMT-based - Pure ML): {:+.1f} percentage points\n", pct(report.gap));
    out += fmt::format("Bayes-optimal accuracy: {:.1f}%   majority-class baseline: {:.1f}%\n",
                       pct(report.oracle.mean), pct(report.majority.mean));
    out += fmt::format("structure search pair scores: Pure ML {}, PMT-based {}\n",
                       report.tan_structure_scores, report.fixed_structure_scores);
    std::size_t flagged = 0;
    for (const auto& r : report.seeds) flagged += r.flagged.size();
    const double edges = report.seeds.empty() ? 0.0 : static_cast<double>(report.seeds.front().tan_edges);
    out += fmt::format("audit: learned TAN has {:.1f} of {} edges off the whitelist on average\n",
                       report.seeds.empty() ? 0.0
                                            : static_cast<double>(flagged) / static_cast<double>(report.seeds.size()),
                       edges);
    for (const auto& [edge, count] : report.flagged_edge_seeds) {
        out += fmt::format("  {} -> {} (in {} of {} seeds)\n", edge.parent, edge.child, count,
                           report.seeds.size());
    }
    return out;
}

std::string emit_report(const ComparisonReport& report) {
    std::string out;
    out += "# pmtbn comparison report\n";
    out += "format pmtbn-comparison-1\n";
    out += fmt::format("structure {}\n", report.structure_source);
    out += fmt::format("ground_truth {}\n", report.ground_truth_source);
    out += fmt::format("class {}\n", report.class_name);
    out += fmt::format("n_train {}\n", report.n_train);
    out += fmt::format("n_test {}\n", report.n_test);
    out += fmt::format("alpha {}\n", format_real(report.alpha));
    out += fmt::format("gamma {}\n", format_real(report.gamma));
    out += fmt::format("seed_count {}\n", report.seeds.size());
    out += fmt::format("tan_structure_scores {}\n", report.tan_structure_scores);
    out += fmt::format("fixed_structure_scores {}\n", report.fixed_structure_scores);
    auto summary = [&](std::string_view key, const AccuracySummary& s) {
        out += fmt::format("{}_accuracy_mean {}\n", key, format_real(s.mean));
        out += fmt::format("{}_accuracy_std {}\n", key, format_real(s.stddev));
    };
    summary("tan", report.tan);
    summary("fixed", report.fixed);
    summary("oracle", report.oracle);
    summary("majority", report.majority);
    out += fmt::format("accuracy_gap {}\n", format_real(report.gap));
    for (const auto& [edge, count] : report.flagged_edge_seeds) {
        out += fmt::format("audit_flagged {} -> {} {}\n", edge.parent, edge.child, count);
    }
    out += "per_seed\n";
    out += "seed,tan_accuracy,fixed_accuracy,oracle_accuracy,majority_accuracy,tan_edges,tan_flagged_edges\n";
    for (const auto& r : report.seeds) {
        out += fmt::format("{},{},{},{},{},{},{}\n", r.seed, format_real(r.tan_accuracy),
                           format_real(r.fixed_accuracy), format_real(r.oracle_accuracy),
                           format_real(r.majority_accuracy), r.tan_edges, r.flagged.size());
    }
    out += "end\n";
    return out;
}

}  // namespace pmtbn
