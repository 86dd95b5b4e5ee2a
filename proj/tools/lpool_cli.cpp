// lpool command line front end: fit, apply, eval, heatmap.
//
// Exit codes: 0 success, 1 usage error, 2 malformed input, 3 shape/scale
// mismatch, 4 numerical failure. Reports go to stdout as key=value lines,
// diagnostics to stderr.

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lpool.h"

namespace {

std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

int report_failure(lpool_status status) {
    const char* detail = lpool_last_error();
    std::fprintf(stderr, "error: %s\n",
                 detail[0] ? detail : lpool_status_name(status));
    return static_cast<int>(status);
}

using dataset_ptr = std::unique_ptr<lpool_dataset, decltype(&lpool_dataset_free)>;
using operator_ptr =
    std::unique_ptr<lpool_operator, decltype(&lpool_operator_free)>;
using report_ptr = std::unique_ptr<lpool_report, decltype(&lpool_report_free)>;

dataset_ptr wrap(lpool_dataset* p) { return {p, &lpool_dataset_free}; }
operator_ptr wrap(lpool_operator* p) { return {p, &lpool_operator_free}; }
report_ptr wrap(lpool_report* p) { return {p, &lpool_report_free}; }

struct FitArgs {
    std::string input;
    std::string output;
    double alpha = 0.0;
    double scale = 0.0;
    std::string norm;
    std::uint32_t eigvecs = 1;
    double ridge = 0.0;
    std::uint64_t max_per_class = 0;
    double epsilon = 1e-8;
    std::string grand_mean = "algo";
};

int run_fit(const FitArgs& args) {
    lpool_dataset* raw_data = nullptr;
    if (lpool_status s = lpool_dataset_read(args.input.c_str(), &raw_data))
        return report_failure(s);
    dataset_ptr data = wrap(raw_data);

    lpool_fit_options opts;
    lpool_fit_options_defaults(&opts);
    opts.alpha = args.alpha;
    opts.scale = args.scale;
    opts.norm = args.norm == "l1" ? 1 : 2;
    opts.num_eigvecs = args.eigvecs;
    opts.ridge = args.ridge;
    opts.max_per_class = args.max_per_class;
    opts.epsilon = args.epsilon;
    opts.weighted_grand_mean = args.grand_mean == "weighted" ? 1 : 0;

    lpool_operator* raw_op = nullptr;
    if (lpool_status s = lpool_fit(data.get(), &opts, &raw_op))
        return report_failure(s);
    operator_ptr op = wrap(raw_op);

    if (lpool_status s = lpool_operator_write(op.get(), args.output.c_str()))
        return report_failure(s);

    const std::uint32_t locations = lpool_operator_locations(op.get());
    const std::uint32_t eigvecs = lpool_operator_num_eigvecs(op.get());
    std::printf("command=fit\n");
    std::printf("locations=%u\n", locations);
    std::printf("eigvecs=%u\n", eigvecs);
    double residual_max = 0.0;
    for (std::uint32_t m = 1; m <= locations; ++m) {
        double top = 0.0;
        lpool_operator_eigenvalue(op.get(), 1, m, &top);
        std::printf("location=%u eigenvalue=%s\n", m, fmt(top).c_str());
        for (std::uint32_t r = 1; r <= eigvecs; ++r) {
            double res = 0.0;
            lpool_operator_residual(op.get(), r, m, &res);
            if (res > residual_max) residual_max = res;
        }
    }
    std::printf("residual_max=%s\n", fmt(residual_max).c_str());
    std::printf("output=%s\n", args.output.c_str());
    return 0;
}

int run_apply(const std::string& input, const std::string& operator_path,
              const std::string& output) {
    lpool_dataset* raw_data = nullptr;
    if (lpool_status s = lpool_dataset_read(input.c_str(), &raw_data))
        return report_failure(s);
    dataset_ptr data = wrap(raw_data);

    lpool_operator* raw_op = nullptr;
    if (lpool_status s = lpool_operator_read(operator_path.c_str(), &raw_op))
        return report_failure(s);
    operator_ptr op = wrap(raw_op);

    lpool_dataset* raw_out = nullptr;
    if (lpool_status s = lpool_apply(op.get(), data.get(), &raw_out))
        return report_failure(s);
    dataset_ptr pooled = wrap(raw_out);

    if (lpool_status s = lpool_dataset_write(pooled.get(), output.c_str()))
        return report_failure(s);
    std::printf("command=apply\n");
    std::printf("rows=%u cols=%u channels=%u samples=%u\n",
                lpool_dataset_rows(pooled.get()), lpool_dataset_cols(pooled.get()),
                lpool_dataset_channels(pooled.get()),
                lpool_dataset_num_samples(pooled.get()));
    std::printf("output=%s\n", output.c_str());
    return 0;
}

int run_eval(const std::string& input, const std::string& operator_path,
             const std::string& baseline, double scale) {
    lpool_dataset* raw_data = nullptr;
    if (lpool_status s = lpool_dataset_read(input.c_str(), &raw_data))
        return report_failure(s);
    dataset_ptr data = wrap(raw_data);

    operator_ptr op = wrap(static_cast<lpool_operator*>(nullptr));
    if (!operator_path.empty()) {
        lpool_operator* raw_op = nullptr;
        if (lpool_status s = lpool_operator_read(operator_path.c_str(), &raw_op))
            return report_failure(s);
        op = wrap(raw_op);
    } else {
        lpool_operator* raw_op = nullptr;
        if (lpool_status s = lpool_average_operator(
                lpool_dataset_rows(data.get()), lpool_dataset_cols(data.get()),
                scale, lpool_dataset_channels(data.get()), &raw_op))
            return report_failure(s);
        op = wrap(raw_op);
    }

    lpool_report* raw_report = nullptr;
    if (lpool_status s = lpool_evaluate(op.get(), data.get(), &raw_report))
        return report_failure(s);
    report_ptr report = wrap(raw_report);

    std::printf("command=eval\n");
    std::printf("source=%s\n",
                operator_path.empty() ? baseline.c_str() : operator_path.c_str());
    const std::uint32_t locations = lpool_report_locations(report.get());
    std::printf("locations=%u\n", locations);
    for (std::uint32_t m = 1; m <= locations; ++m) {
        double s_b = 0.0, s_w = 0.0, ratio = 0.0;
        int infinite = 0;
        lpool_report_location(report.get(), m, &s_b, &s_w, &ratio, &infinite);
        std::printf("location=%u s_b=%s s_w=%s ratio=%s\n", m, fmt(s_b).c_str(),
                    fmt(s_w).c_str(), infinite ? "inf" : fmt(ratio).c_str());
    }
    std::printf("aggregate=%s\n", fmt(lpool_report_aggregate(report.get())).c_str());
    std::printf("flagged=%u\n", lpool_report_flagged(report.get()));
    return 0;
}

int run_heatmap(const std::string& operator_path, std::uint32_t location,
                std::uint32_t eigvec, const std::string& output,
                const std::string& format) {
    lpool_operator* raw_op = nullptr;
    if (lpool_status s = lpool_operator_read(operator_path.c_str(), &raw_op))
        return report_failure(s);
    operator_ptr op = wrap(raw_op);

    const lpool_heatmap_format f =
        format == "pgm" ? LPOOL_HEATMAP_PGM : LPOOL_HEATMAP_CSV;
    if (lpool_status s =
            lpool_heatmap_write(op.get(), location, eigvec, f, output.c_str()))
        return report_failure(s);
    std::printf("command=heatmap\n");
    std::printf("location=%u eigvec=%u format=%s\n", location, eigvec,
                format.c_str());
    std::printf("output=%s\n", output.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"learned spatially-varying linear pooling"};
    app.require_subcommand(1);

    FitArgs fit_args;
    CLI::App* fit = app.add_subcommand(
        "fit", "learn a pooling operator from a labeled dataset");
    fit->add_option("--input", fit_args.input, "FMP1 dataset path")->required();
    fit->add_option("--output", fit_args.output, "POOL operator path")->required();
    fit->add_option("--alpha", fit_args.alpha, "locality penalty coefficient")
        ->required();
    fit->add_option("--scale", fit_args.scale, "down-scaling factor s")->required();
    fit->add_option("--norm", fit_args.norm, "row norm")
        ->required()
        ->check(CLI::IsMember({"l1", "l2"}));
    fit->add_option("--eigvecs", fit_args.eigvecs, "eigenvectors per location")
        ->required()
        ->check(CLI::IsMember({1, 2}));
    fit->add_option("--ridge", fit_args.ridge, "explicit ridge (default: auto)");
    fit->add_option("--max-per-class", fit_args.max_per_class,
                    "cap on contributing samples per class");
    fit->add_option("--epsilon", fit_args.epsilon, "variance guard");
    fit->add_option("--grand-mean", fit_args.grand_mean,
                    "between-class grand mean convention")
        ->check(CLI::IsMember({"algo", "weighted"}));

    std::string apply_input, apply_operator, apply_output;
    CLI::App* apply = app.add_subcommand("apply", "pool a dataset");
    apply->add_option("--input", apply_input, "FMP1 dataset path")->required();
    apply->add_option("--operator", apply_operator, "POOL operator path")
        ->required();
    apply->add_option("--output", apply_output, "pooled FMP1 path")->required();

    std::string eval_input, eval_operator, eval_baseline;
    double eval_scale = 0.0;
    CLI::App* eval = app.add_subcommand(
        "eval", "report class separability of pooled outputs");
    eval->add_option("--input", eval_input, "FMP1 dataset path")->required();
    CLI::Option* eval_op_opt =
        eval->add_option("--operator", eval_operator, "POOL operator path");
    CLI::Option* eval_base_opt =
        eval->add_option("--baseline", eval_baseline, "baseline operator")
            ->check(CLI::IsMember({"average"}));
    CLI::Option* eval_scale_opt = eval->add_option(
        "--scale", eval_scale, "baseline down-scaling factor");
    eval_op_opt->excludes(eval_base_opt);
    eval_base_opt->needs(eval_scale_opt);

    std::string hm_operator, hm_output, hm_format = "csv";
    std::uint32_t hm_location = 0, hm_eigvec = 1;
    CLI::App* heatmap =
        app.add_subcommand("heatmap", "export one operator row as an image");
    heatmap->add_option("--operator", hm_operator, "POOL operator path")
        ->required();
    heatmap->add_option("--location", hm_location, "output location m (1-based)")
        ->required();
    heatmap->add_option("--eigvec", hm_eigvec, "eigen index (1-based)")
        ->required();
    heatmap->add_option("--output", hm_output, "heatmap path")->required();
    heatmap->add_option("--format", hm_format, "csv or pgm")
        ->check(CLI::IsMember({"csv", "pgm"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (fit->parsed()) return run_fit(fit_args);
    if (apply->parsed()) return run_apply(apply_input, apply_operator, apply_output);
    if (eval->parsed()) {
        if (eval_operator.empty() && eval_baseline.empty()) {
            std::fprintf(stderr, "error: pass --operator or --baseline average\n");
            return 1;
        }
        return run_eval(eval_input, eval_operator, eval_baseline, eval_scale);
    }
    if (heatmap->parsed())
        return run_heatmap(hm_operator, hm_location, hm_eigvec, hm_output,
                           hm_format);
    return 1;
}
