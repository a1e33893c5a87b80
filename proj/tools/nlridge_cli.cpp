// Command-line front end: single-image denoising, directory benchmarking
// with CSV output, and oracle self-verification.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "nlridge/nlridge.hpp"

namespace fs = std::filesystem;
using namespace nlridge;

namespace {

constexpr int kExitBadArgs = 1;
constexpr int kExitIoError = 2;
constexpr int kExitVerifyFailed = 3;

struct ParamFlags {
    std::string method = "nlridge";
    double sigma = 0.0;
    int patch_size1 = 0;
    int patch_size2 = 0;
    int group_size1 = 0;
    int group_size2 = 0;
    int window = 0;
    int stride = 0;
    double threshold_multiplier = 0.0;
    int threads = 0;
};

void add_param_flags(CLI::App* cmd, ParamFlags& f) {
    cmd->add_option("--sigma", f.sigma, "Noise standard deviation (required, intensity units)")
        ->required();
    cmd->add_option("--method", f.method, "nlridge | nlbayes-family | bm3d-family")
        ->check(CLI::IsMember({"nlridge", "nlbayes-family", "bm3d-family"}));
    cmd->add_option("--patch-size1", f.patch_size1, "Step-1 patch side (default per noise level)");
    cmd->add_option("--patch-size2", f.patch_size2, "Step-2 patch side");
    cmd->add_option("--group-size1", f.group_size1, "Step-1 group size m");
    cmd->add_option("--group-size2", f.group_size2, "Step-2 group size m");
    cmd->add_option("--window", f.window, "Search window side (default 45)");
    cmd->add_option("--stride", f.stride, "Reference grid stride (default 4)");
    cmd->add_option("--threshold-multiplier", f.threshold_multiplier,
                    "Hard-threshold multiplier for bm3d-family (default sqrt(2))");
    cmd->add_option("--threads", f.threads, "Worker thread cap (default: hardware)");
}

StageParams resolve_params(const ParamFlags& f) {
    StageParams p = StageParams::recommended(f.sigma, parse_method(f.method));
    if (f.patch_size1 > 0) p.patch_side1 = f.patch_size1;
    if (f.patch_size2 > 0) p.patch_side2 = f.patch_size2;
    if (f.group_size1 > 0) p.group_size1 = f.group_size1;
    if (f.group_size2 > 0) p.group_size2 = f.group_size2;
    if (f.window > 0) p.window_side = f.window;
    if (f.stride > 0) p.stride = f.stride;
    if (f.threshold_multiplier > 0) p.threshold_multiplier = f.threshold_multiplier;
    p.threads = f.threads > 0 ? f.threads
                              : std::max(1u, std::thread::hardware_concurrency());
    p.validate();
    return p;
}

void print_report(std::ostream& os, const RunReport& r) {
    os << "method=" << to_string(r.params.method) << " sigma=" << r.params.sigma
       << " patch=" << r.params.patch_side1 << "/" << r.params.patch_side2 << " group="
       << r.params.group_size1 << "/" << r.params.group_size2 << " window="
       << r.params.window_side << " stride=" << r.params.stride << " threads="
       << r.params.threads << "\n";
    if (r.psnr_noisy) os << "psnr_noisy=" << *r.psnr_noisy << " dB\n";
    if (r.psnr_step1) os << "psnr_step1=" << *r.psnr_step1 << " dB\n";
    if (r.psnr_step2) os << "psnr_step2=" << *r.psnr_step2 << " dB\n";
    os << "gram_fallbacks=" << r.step1_fallbacks + r.step2_fallbacks << " seconds=" << r.seconds
       << "\n";
}

int run_denoise(const std::string& input, const std::string& output,
                const std::string& step1_output, const std::string& reference,
                const ParamFlags& flags) {
    const StageParams params = resolve_params(flags);
    const GrayImage noisy = load_image(input);
    DenoiseResult result = denoise(noisy, params);
    if (!reference.empty()) {
        const GrayImage clean = load_image(reference);
        result.report.psnr_noisy = psnr(clean, clipped(noisy));
        result.report.psnr_step1 = psnr(clean, clipped(result.step1));
        result.report.psnr_step2 = psnr(clean, clipped(result.step2));
    }
    save_image(result.step2, output);
    if (!step1_output.empty()) save_image(result.step1, step1_output);
    print_report(std::cout, result.report);
    return 0;
}

int run_bench(const std::string& dir, const std::string& csv_path, double sigma,
              std::uint64_t seed, const ParamFlags& flags) {
    std::vector<fs::path> inputs;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".pgm")
            inputs.push_back(entry.path());
    std::sort(inputs.begin(), inputs.end());
    if (inputs.empty()) throw std::runtime_error("no .pgm images in '" + dir + "'");

    const StageParams params = resolve_params(flags);
    std::ofstream csv(csv_path);
    if (!csv) throw std::runtime_error("cannot open '" + csv_path + "' for writing");
    csv << "image,sigma,seed,psnr_noisy,psnr_step1,psnr_step2,seconds\n";

    double sum_noisy = 0.0, sum_step1 = 0.0, sum_step2 = 0.0, sum_seconds = 0.0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const GrayImage clean = load_image(inputs[i].string());
        const GrayImage noisy =
            add_gaussian_noise(clean, {sigma, derive_seed(seed, static_cast<std::uint64_t>(i))});
        const DenoiseResult result = denoise(noisy, params);
        const double p_noisy = psnr(clean, clipped(noisy));
        const double p1 = psnr(clean, clipped(result.step1));
        const double p2 = psnr(clean, clipped(result.step2));
        csv << inputs[i].filename().string() << "," << sigma << "," << seed << "," << p_noisy
            << "," << p1 << "," << p2 << "," << result.report.seconds << "\n";
        std::cout << inputs[i].filename().string() << ": noisy " << p_noisy << " dB, step1 " << p1
                  << " dB, step2 " << p2 << " dB (" << result.report.seconds << " s)\n";
        sum_noisy += p_noisy;
        sum_step1 += p1;
        sum_step2 += p2;
        sum_seconds += result.report.seconds;
    }
    const double count = static_cast<double>(inputs.size());
    csv << "average," << sigma << "," << seed << "," << sum_noisy / count << ","
        << sum_step1 / count << "," << sum_step2 / count << "," << sum_seconds << "\n";
    std::cout << "average: noisy " << sum_noisy / count << " dB, step1 " << sum_step1 / count
              << " dB, step2 " << sum_step2 / count << " dB (" << sum_seconds << " s total)\n";
    return 0;
}

bool check(std::ostream& os, const std::string& label, bool ok) {
    os << (ok ? "[PASS] " : "[FAIL] ") << label << "\n";
    return ok;
}

// Cross-checks every closed form against the independent oracles.
int run_verify(long trials, std::uint64_t seed) {
    bool all_ok = true;
    std::mt19937_64 rng(seed);
    auto uniform = [&rng](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };
    auto random_matrix = [&](int rows, int cols, double scale) {
        Eigen::MatrixXd m(rows, cols);
        for (int j = 0; j < cols; ++j)
            for (int i = 0; i < rows; ++i) m(i, j) = uniform(-scale, scale);
        return m;
    };

    {
        bool ok = true;
        double worst = 0.0;
        for (int trial = 0; trial < 50; ++trial) {
            const int n = 9 + static_cast<int>(rng() % 41);
            const int m = 4 + static_cast<int>(rng() % static_cast<unsigned>(std::min(15, n - 3)));
            const double sigma = uniform(1.0, 50.0);
            const Eigen::MatrixXd group = random_matrix(n, m, 128.0);
            const Eigen::MatrixXd fast = step1_weights(group, sigma);
            const Eigen::MatrixXd slow = oracle::numeric_minimize_sure(group, sigma);
            const double rel = (fast - slow).norm() / std::max(slow.norm(), 1.0);
            worst = std::max(worst, rel);
            ok = ok && rel < 1e-8;
        }
        all_ok &= check(std::cout, "step-1 weights match the per-column oracle (worst rel " +
                                       std::to_string(worst) + ")", ok);
    }
    {
        const Eigen::MatrixXd clean = random_matrix(4, 3, 100.0);
        const Eigen::MatrixXd theta = random_matrix(3, 3, 0.5);
        const double sigma = 5.0;
        const auto report = oracle::mc_statistic(
            clean, sigma,
            [&](const Eigen::MatrixXd& y) {
                const double loss = (y * theta - clean).squaredNorm();
                return sure_value(y, theta, sigma) - loss;
            },
            trials, derive_seed(seed, 1));
        const bool ok = std::abs(report.mean) <= 3.0 * report.standard_error;
        all_ok &= check(std::cout, "SURE is unbiased for the combination family (gap " +
                                       std::to_string(report.mean) + " +- " +
                                       std::to_string(report.standard_error) + ")", ok);
    }
    {
        const Eigen::MatrixXd a = random_matrix(5, 4, 50.0);
        const Eigen::MatrixXd b = random_matrix(5, 4, 50.0);
        const Eigen::MatrixXd theta = random_matrix(4, 4, 0.7);
        const double sigma = 3.0;
        const double closed =
            (a * theta - b).squaredNorm() + 5.0 * sigma * sigma * theta.squaredNorm();
        const auto report = oracle::mc_statistic(
            a, sigma,
            [&](const Eigen::MatrixXd& y) { return (y * theta - b).squaredNorm(); }, trials,
            derive_seed(seed, 2));
        const bool ok = std::abs(report.mean - closed) <= 3.0 * report.standard_error;
        all_ok &= check(std::cout, "noise-inflation identity holds in expectation", ok);
    }
    {
        bool ok = true;
        const TransformPair t = make_transforms(1, 4);  // n=1, m=4 -> 4 coefficients
        for (int trial = 0; trial < 50 && ok; ++trial) {
            const double sigma = uniform(0.5, 3.0);
            const Eigen::MatrixXd group = random_matrix(1, 4, 4.0 * sigma);
            const Eigen::MatrixXd best = oracle::exhaustive_binary_mask(group, t, sigma);
            const Eigen::MatrixXd rule = bm3d_step1_threshold(group, t, sigma);
            const Eigen::MatrixXd coeffs = to_transform_domain(group, t);
            for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
                if (std::abs(std::abs(coeffs(i)) - std::sqrt(2.0) * sigma) < 1e-9) continue;
                ok = ok && best(i) == rule(i);
            }
        }
        all_ok &= check(std::cout, "hard-threshold rule matches exhaustive mask search", ok);
    }
    {
        bool ok = true;
        for (int trial = 0; trial < 20; ++trial) {
            const Eigen::MatrixXd pilot = random_matrix(9, 5, 60.0);
            const double sigma = uniform(1.0, 30.0);
            const Eigen::MatrixXd theta = step2_weights(pilot, sigma);
            const double base = risk_value(pilot, theta, sigma);
            for (int k = 0; k < 50; ++k) {
                const Eigen::MatrixXd perturbed =
                    theta + 1e-3 * theta.norm() * random_matrix(5, 5, 1.0);
                ok = ok && base <= risk_value(pilot, perturbed, sigma) + 1e-9;
            }
        }
        all_ok &= check(std::cout, "step-2 weights minimize the closed-form risk", ok);
    }

    return all_ok ? 0 : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"NL-Ridge two-step patch-group image denoiser"};
    app.require_subcommand(1);

    ParamFlags denoise_flags;
    std::string input, output, step1_output, reference;
    CLI::App* cmd_denoise = app.add_subcommand("denoise", "Denoise a single PGM image");
    cmd_denoise->add_option("--input", input, "Noisy input image (PGM)")->required();
    cmd_denoise->add_option("--output", output, "Where to write the final estimate")->required();
    cmd_denoise->add_option("--step1-output", step1_output, "Also write the pilot estimate");
    cmd_denoise->add_option("--reference", reference, "Clean image for PSNR reporting");
    add_param_flags(cmd_denoise, denoise_flags);

    ParamFlags bench_flags;
    std::string bench_dir, csv_path = "bench.csv";
    std::uint64_t bench_seed = 0;
    CLI::App* cmd_bench =
        app.add_subcommand("bench", "Noise + denoise a directory of clean PGMs, emit CSV");
    cmd_bench->add_option("--dir", bench_dir, "Directory of clean .pgm images")->required();
    cmd_bench->add_option("--csv", csv_path, "Output CSV path");
    cmd_bench->add_option("--seed", bench_seed, "Noise seed");
    add_param_flags(cmd_bench, bench_flags);

    long verify_trials = 100000;
    std::uint64_t verify_seed = 20220419;
    CLI::App* cmd_verify =
        app.add_subcommand("verify", "Cross-check closed forms against the numerical oracles");
    cmd_verify->add_option("--trials", verify_trials, "Monte-Carlo trials")
        ->check(CLI::Range(100L, 100000000L));
    cmd_verify->add_option("--seed", verify_seed, "Base seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitBadArgs;
    }

    try {
        if (app.got_subcommand(cmd_denoise))
            return run_denoise(input, output, step1_output, reference, denoise_flags);
        if (app.got_subcommand(cmd_bench))
            return run_bench(bench_dir, csv_path, bench_flags.sigma, bench_seed, bench_flags);
        if (app.got_subcommand(cmd_verify)) return run_verify(verify_trials, verify_seed);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadArgs;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIoError;
    }
    return kExitBadArgs;
}
