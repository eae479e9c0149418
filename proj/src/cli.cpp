#include "pmtbn/cli.hpp"

#include <optional>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "pmtbn/errors.hpp"
#include "pmtbn/harness.hpp"
#include "pmtbn/inference.hpp"
#include "pmtbn/io.hpp"
#include "pmtbn/learning.hpp"
#include "pmtbn/pmt.hpp"

namespace pmtbn {

namespace {

struct Options {
    std::optional<std::string> structure;
    std::optional<std::string> model;
    std::optional<std::string> whitelist;
    std::optional<std::string> class_name;
    std::optional<std::string> train;
    std::optional<std::string> test;
    std::optional<std::string> out;
    std::optional<std::string> truth_out;
    std::optional<std::string> train_out;
    std::optional<std::string> test_out;
    std::optional<std::string> report;
    std::vector<std::uint64_t> seeds;
    std::size_t seed_count = kDefaultSeedCount;
    std::size_t n_train = kDefaultTrainRows;
    std::size_t n_test = kDefaultTestRows;
    double alpha = kDefaultAlpha;
    double gamma = kDefaultGamma;
    bool sequential = false;
};

Structure load_structure(const Options& o) {
    if (o.structure) return parse_structure(read_text_file(*o.structure));
    return default_pmt_structure().structure;
}

std::string resolve_class(const Options& o, const std::optional<std::string>& fallback) {
    if (o.class_name) return *o.class_name;
    if (fallback) return *fallback;
    throw InvalidArgumentError("no class variable: pass --class or add a class line");
}

std::uint64_t single_seed(const Options& o) {
    if (o.seeds.size() > 1) throw InvalidArgumentError("this command takes a single --seed");
    return o.seeds.empty() ? 1 : o.seeds.front();
}

void emit(const std::optional<std::string>& path, const std::string& text, std::ostream& out) {
    if (path) {
        write_text_file(*path, text);
    } else {
        out << text;
    }
}

int cmd_generate(const Options& o, std::ostream& out) {
    NetworkModel truth = [&] {
        if (o.model) return parse_model(read_text_file(*o.model));
        auto s = load_structure(o);
        auto streams = derive_seed_streams(single_seed(o));
        return random_ground_truth(s.schema, s.dag, streams.ground_truth, o.gamma)
            .with_class_name(s.class_name);
    }();
    const auto data = generate_experiment_data(truth, derive_seed_streams(single_seed(o)).data,
                                               o.n_train, o.n_test);
    if (o.truth_out) write_text_file(*o.truth_out, emit_model(truth));
    if (o.train_out) write_text_file(*o.train_out, emit_dataset(data.train));
    if (o.test_out) write_text_file(*o.test_out, emit_dataset(data.test));
    out << fmt::format("generated {} training and {} test rows over {} variables (seed {})\n",
                       data.train.size(), data.test.size(), truth.schema().size(), single_seed(o));
    return kExitOk;
}

int cmd_learn_tan(const Options& o, std::ostream& out) {
    auto s = load_structure(o);
    auto cls = resolve_class(o, s.class_name);
    auto train = parse_dataset(read_text_file(*o.train), s.schema);
    emit(o.out, emit_model(learn_tan(train, s.schema, cls, o.alpha)), out);
    return kExitOk;
}

int cmd_train_fixed(const Options& o, std::ostream& out) {
    auto s = load_structure(o);
    std::optional<std::string> cls = o.class_name ? o.class_name : s.class_name;
    auto train = parse_dataset(read_text_file(*o.train), s.schema);
    emit(o.out, emit_model(estimate_cpts(s.dag, s.schema, train, o.alpha).with_class_name(cls)), out);
    return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out, std::string_view label) {
    auto model = parse_model(read_text_file(*o.model));
    auto cls = resolve_class(o, model.class_name());
    Dataset test = o.test ? parse_dataset(read_text_file(*o.test), model.schema())
                          : generate_experiment_data(model, derive_seed_streams(single_seed(o)).data,
                                                     o.n_train, o.n_test)
                                .test;
    const double accuracy = evaluate_accuracy(model, test, cls);
    out << fmt::format("{}: {:.2f}% of right predictions ({} rows)\naccuracy {}\n", label,
                       100.0 * accuracy, test.size(), format_real(accuracy));
    return kExitOk;
}

int cmd_audit(const Options& o, std::ostream& out) {
    if (o.model && o.structure) throw InvalidArgumentError("pass either --model or --structure, not both");
    Structure s = o.model ? parse_model(read_text_file(*o.model)).structure() : load_structure(o);
    EdgeWhitelist whitelist = o.whitelist
                                  ? parse_whitelist(read_text_file(*o.whitelist), s.schema)
                                  : parse_whitelist(default_pmt_whitelist_text(), s.schema);
    out << render_audit(audit_structure(s.dag, whitelist));
    return kExitOk;
}

int cmd_compare(const Options& o, std::ostream& out) {
    StudyConfig config;
    if (o.structure) config.structure_path = *o.structure;
    if (o.model) config.ground_truth_path = *o.model;
    if (o.whitelist) config.whitelist_path = *o.whitelist;
    config.n_train = o.n_train;
    config.n_test = o.n_test;
    config.seeds = o.seeds.empty() ? default_seeds(o.seed_count) : o.seeds;
    config.alpha = o.alpha;
    config.gamma = o.gamma;
    config.class_name = o.class_name;
    config.parallel = !o.sequential;
    auto report = run_comparison(config);
    if (o.report) write_text_file(*o.report, emit_report(report));
    out << render_comparison_table(report);
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Discrete Bayesian networks: learned TAN vs theory-fixed structure", "pmtbn"};
    app.require_subcommand(1);
    Options o;

    auto structure = [&](CLI::App* c) {
        c->add_option("--structure", o.structure, "Structure file (default: shipped PMT network)");
    };
    auto class_opt = [&](CLI::App* c) {
        c->add_option("--class", o.class_name, "Class variable (default: the file's class line)");
    };
    auto seed = [&](CLI::App* c) { c->add_option("--seed", o.seeds, "Random seed")->expected(1); };
    auto sizes = [&](CLI::App* c) {
        c->add_option("--n-train", o.n_train, "Training rows")->check(CLI::PositiveNumber);
        c->add_option("--n-test", o.n_test, "Test rows")->check(CLI::PositiveNumber);
    };
    auto alpha = [&](CLI::App* c) {
        c->add_option("--alpha", o.alpha, "Laplace pseudocount")->check(CLI::NonNegativeNumber);
    };
    auto gamma = [&](CLI::App* c) {
        c->add_option("--gamma", o.gamma, "Ground-truth sharpening exponent")->check(CLI::PositiveNumber);
    };

    auto* generate = app.add_subcommand("generate", "Build a ground-truth model and sample train/test data");
    structure(generate);
    generate->add_option("--model", o.model, "Sample from this model instead of a random one");
    seed(generate);
    sizes(generate);
    gamma(generate);
    generate->add_option("--truth-out", o.truth_out, "Write the ground-truth model here");
    generate->add_option("--train-out", o.train_out, "Write the training CSV here");
    generate->add_option("--test-out", o.test_out, "Write the test CSV here");

    auto* learn = app.add_subcommand("learn-tan", "Learn a tree-augmented naive Bayes model");
    structure(learn);
    class_opt(learn);
    alpha(learn);
    learn->add_option("--train", o.train, "Training CSV")->required();
    learn->add_option("--out", o.out, "Model output (default: standard output)");

    auto* fixed = app.add_subcommand("train-fixed", "Estimate CPTs for the fixed structure");
    structure(fixed);
    class_opt(fixed);
    alpha(fixed);
    fixed->add_option("--train", o.train, "Training CSV")->required();
    fixed->add_option("--out", o.out, "Model output (default: standard output)");

    auto add_eval = [&](const char* name, const char* help) {
        auto* c = app.add_subcommand(name, help);
        c->add_option("--model", o.model, "Model file")->required();
        class_opt(c);
        c->add_option("--test", o.test, "Test CSV (default: sample one from the model)");
        seed(c);
        sizes(c);
        return c;
    };
    auto* eval = add_eval("eval", "Score a model's class predictions on a test set");
    auto* oracle = add_eval("oracle-eval", "Bayes-optimal accuracy of a ground-truth model");

    auto* audit = app.add_subcommand("audit", "List DAG edges absent from a whitelist");
    structure(audit);
    audit->add_option("--model", o.model, "Audit the DAG of this model");
    audit->add_option("--whitelist", o.whitelist, "Whitelist file (default: shipped PMT whitelist)");

    auto* compare = app.add_subcommand("compare", "Run the multi-seed TAN vs fixed-structure study");
    structure(compare);
    compare->add_option("--model", o.model, "Ground-truth model (default: random per seed)");
    compare->add_option("--whitelist", o.whitelist, "Whitelist (default: the fixed structure's edges)");
    class_opt(compare);
    compare->add_option("--seed", o.seeds, "Study seed; repeat for several");
    compare->add_option("--seeds", o.seed_count, "Use seeds 1..N when no --seed is given")
        ->check(CLI::PositiveNumber);
    sizes(compare);
    alpha(compare);
    gamma(compare);
    compare->add_option("--report", o.report, "Write the machine-readable report here");
    compare->add_flag("--sequential", o.sequential, "Run seeds one after another");

    std::vector<std::string> argv_storage{"pmtbn"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_storage) argv.push_back(a.data());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitUsage;
    }

    try {
        if (*generate) return cmd_generate(o, out);
        if (*learn) return cmd_learn_tan(o, out);
        if (*fixed) return cmd_train_fixed(o, out);
        if (*eval) return cmd_eval(o, out, "model");
        if (*oracle) return cmd_eval(o, out, "Bayes-optimal");
        if (*audit) return cmd_audit(o, out);
        if (*compare) return cmd_compare(o, out);
    } catch (const std::exception& e) {
        err << "pmtbn: " << e.what() << '\n';
        return kExitDataError;
    }
    return kExitUsage;
}

}  // namespace pmtbn
