#pragma once

// Command line front end. Kept in a header so the test suite can drive it
// in-process; tools/main.cpp only forwards argc/argv.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dopfit/dopfit.hpp"

namespace dopfit::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 2, kData = 3, kNumerical = 4 };

/// Reads `--config` files written as JSON. Objects nest into subcommand
/// sections, e.g. {"fit": {"degree": 35, "range": [-1, 1]}}.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override {
    return "{}";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(input);
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    collect(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  }

  static void collect(const nlohmann::json& j, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto nested = parents;
        nested.push_back(key);
        collect(value, nested, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

struct SyntheticOptions {
  std::string function = "cos5x";
  std::vector<double> coefficients;
  Eigen::Index n = 500;
  std::vector<double> range{-2.0 * std::numbers::pi, 2.0 * std::numbers::pi};
  double sigma_y = 0.1;
  double sigma_dy = 2.0;
  std::uint64_t seed = 1;

  SyntheticSpec to_spec() const {
    SyntheticSpec spec;
    if (function == "cos5x") {
      spec.function = SyntheticFunction::Cos5x;
    } else if (function == "polynomial") {
      spec.function = SyntheticFunction::Polynomial;
      spec.coefficients = coefficients;
    } else {
      throw Error(ErrorCode::InvalidArgument, "unknown function '" + function + "'");
    }
    spec.x_lo = range.at(0);
    spec.x_hi = range.at(1);
    spec.n = n;
    spec.sigma_y = sigma_y;
    spec.sigma_dy = sigma_dy;
    spec.seed = seed;
    return spec;
  }
};

inline void add_synthetic_options(CLI::App* cmd, SyntheticOptions& o) {
  cmd->add_option("--function", o.function, "Synthetic target")
      ->check(CLI::IsMember({"cos5x", "polynomial"}))
      ->capture_default_str();
  cmd->add_option("--coefficients", o.coefficients, "Ascending polynomial coefficients (function = polynomial)")
      ->delimiter(',');
  cmd->add_option("--n", o.n, "Number of samples")->check(CLI::Range(2, 100000000))->capture_default_str();
  cmd->add_option("--range", o.range, "Abscissa range: lo hi")->expected(2)->capture_default_str();
  cmd->add_option("--sigma-y", o.sigma_y, "Value noise standard deviation")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--sigma-dy", o.sigma_dy, "Derivative noise standard deviation")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
}

inline std::string stem_with(const std::filesystem::path& path, const std::string& suffix) {
  std::filesystem::path p = path;
  const std::string ext = p.has_extension() ? p.extension().string() : std::string(".csv");
  p.replace_extension();
  return p.string() + suffix + ext;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  os << text;
  if (!os) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

inline std::string csv_of(const auto& writer) {
  std::ostringstream os;
  writer(os);
  return os.str();
}

/// Loaded or generated input for fit / compare.
struct FitInput {
  Eigen::VectorXd x_raw;
  Observations obs;
  std::shared_ptr<const WeightModel> weights;
  std::optional<SyntheticData> truth;
  FitMetadata meta;
};

struct FitOptions {
  std::string input;
  std::optional<double> sigma_y;
  std::optional<double> sigma_dy;
  SyntheticOptions synthetic;
  int degree = 35;
  std::string method = "dop";
  std::string abscissa = "normalized";
  std::string output = "fit.csv";
};

inline FitInput load_fit_input(const FitOptions& o, std::ostream& err) {
  FitInput in;
  if (!o.input.empty()) {
    Dataset ds = read_dataset(std::filesystem::path(o.input), o.sigma_y, o.sigma_dy);
    in.x_raw = ds.x_raw;
    in.obs = ds.obs;
    in.weights = std::make_shared<const WeightModel>(ds.weights());
    if (!ds.per_sample_sigma_y) in.meta.sigma_y = o.sigma_y;
    if (!ds.per_sample_sigma_dy) in.meta.sigma_dy = o.sigma_dy;
  } else {
    const SyntheticSpec spec = o.synthetic.to_spec();
    SyntheticData data = generate(spec);
    in.x_raw = data.x_raw;
    in.obs = data.obs;
    in.weights = std::make_shared<const WeightModel>(WeightModel::from_scalar(spec.n, spec.sigma_y, spec.sigma_dy));
    in.meta.sigma_y = spec.sigma_y;
    in.meta.sigma_dy = spec.sigma_dy;
    in.meta.seed = spec.seed;
    in.truth = std::move(data);
  }
  for (const std::string& w : in.weights->warnings()) err << "warning: " << w << '\n';
  return in;
}

struct MethodOutcome {
  Eigen::VectorXd coefficients;
  Eigen::VectorXd y_tilde, dy_tilde, sd_y, sd_dy;
};

inline MethodOutcome run_dop(const FitInput& in, int degree) {
  const BasisSet basis = synthesize_basis(in.x_raw, in.weights, degree);
  const HermiteFit f = fit(basis, in.obs);
  return {f.gamma, f.y_tilde, f.y_tilde_prime, f.sd_y(), f.sd_dy()};
}

inline MethodOutcome run_vandermonde(const FitInput& in, int degree, AbscissaMode mode) {
  const VandermondeBasis vb = vandermonde_basis(in.x_raw, degree, mode);
  MethodOutcome out;
  out.coefficients = solve_normal_equations(vb, *in.weights, in.obs);
  std::tie(out.y_tilde, out.dy_tilde) = reconstruct(vb, out.coefficients);
  // Λ_ỹ = B·G⁻¹·Bᵀ; only the diagonal is needed
  const Eigen::LLT<Eigen::MatrixXd> llt(weighted_gram(vb.b, vb.b_prime, *in.weights));
  const Eigen::MatrixXd gb = llt.solve(vb.b.transpose());
  const Eigen::MatrixXd gbp = llt.solve(vb.b_prime.transpose());
  out.sd_y = (vb.b.array() * gb.transpose().array()).rowwise().sum().max(0.0).sqrt();
  out.sd_dy = (vb.b_prime.array() * gbp.transpose().array()).rowwise().sum().max(0.0).sqrt();
  return out;
}

inline AbscissaMode parse_abscissa(const std::string& s) {
  return s == "raw" ? AbscissaMode::Raw : AbscissaMode::Normalized;
}

inline double sample_std(const Eigen::VectorXd& v) { return detail::sample_std(v); }

inline nlohmann::json residual_summary(const FitInput& in, const MethodOutcome& m) {
  nlohmann::json j = {
      {"std_ry", sample_std(in.obs.y_hat - m.y_tilde)},
      {"std_rdy", sample_std(in.obs.y_hat_prime - m.dy_tilde)},
  };
  if (in.truth) {
    j["std_err_y"] = sample_std(in.truth->y_true - m.y_tilde);
    j["std_err_dy"] = sample_std(in.truth->dy_true - m.dy_tilde);
  }
  return j;
}

inline void write_method(const std::filesystem::path& path, const FitInput& in, const MethodOutcome& m,
                         FitMetadata meta) {
  {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
    write_fit_csv(os, in.x_raw, m.y_tilde, m.dy_tilde, m.sd_y, m.sd_dy);
  }
  write_text(sidecar_path(path), fit_json(m.coefficients, in.x_raw.size(), meta).dump(2) + "\n");
}

/// Runs both methods and returns the difference summary. The Vandermonde solve
/// may fail at high degree; that failure is part of the summary.
inline nlohmann::json compare_methods(const FitInput& in, int degree, AbscissaMode mode,
                                      std::optional<MethodOutcome>* dop_out = nullptr,
                                      std::optional<MethodOutcome>* vdm_out = nullptr) {
  nlohmann::json j;
  j["degree"] = degree;
  j["n"] = in.x_raw.size();
  j["vandermonde_abscissa"] = mode == AbscissaMode::Raw ? "raw" : "normalized";
  const MethodOutcome dop = run_dop(in, degree);
  const BasisSet basis = synthesize_basis(in.x_raw, in.weights, degree);
  j["dop"] = residual_summary(in, dop);
  j["dop"]["quality"] = to_json(quality_measures(basis));
  const VandermondeBasis vb = vandermonde_basis(in.x_raw, degree, mode);
  j["vandermonde"]["gram_condition"] = detail::finite_or_null(gram_condition_number(vb.b, vb.b_prime, *in.weights));
  j["vandermonde"]["quality"] = to_json(quality_measures(vb, *in.weights));
  if (dop_out) *dop_out = dop;
  try {
    const MethodOutcome vdm = run_vandermonde(in, degree, mode);
    j["vandermonde"].update(residual_summary(in, vdm));
    j["difference"] = {
        {"max_abs_y", (dop.y_tilde - vdm.y_tilde).cwiseAbs().maxCoeff()},
        {"max_abs_dy", (dop.dy_tilde - vdm.dy_tilde).cwiseAbs().maxCoeff()},
    };
    j["vandermonde"]["error"] = nullptr;
    if (vdm_out) *vdm_out = vdm;
  } catch (const Error& e) {
    j["vandermonde"]["error"] = e.what();
    j["difference"] = nullptr;
  }
  j["version"] = kVersion;
  return j;
}

inline std::vector<Eigen::Index> parse_n_list(const std::string& spec) {
  std::vector<Eigen::Index> out;
  const auto to_index = [&](const std::string& s) {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (pos != s.size()) throw Error(ErrorCode::InvalidArgument, "'" + s + "' is not an integer");
    return static_cast<Eigen::Index>(v);
  };
  if (spec.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw Error(ErrorCode::InvalidArgument, "n range must be start:step:stop");
    const Eigen::Index start = to_index(parts[0]), step = to_index(parts[1]), stop = to_index(parts[2]);
    if (step <= 0 || stop < start) throw Error(ErrorCode::InvalidArgument, "invalid n range '" + spec + "'");
    for (Eigen::Index n = start; n <= stop; n += step) out.push_back(n);
  } else {
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ',');) {
      if (!p.empty()) out.push_back(to_index(p));
    }
  }
  if (out.empty()) throw Error(ErrorCode::InvalidArgument, "empty n list");
  return out;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Hermite least-squares fitting with covariance-weighted discrete orthogonal polynomials", "dopfit"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON config file; command line flags take precedence");
  app.set_version_flag("--version", kVersion);

  // basis
  struct {
    Eigen::Index n = 300;
    int degree = 4;
    double sigma_y = 0.2, sigma_dy = 0.8;
    std::vector<double> range{-1.0, 1.0};
    std::string prefix = "basis";
    bool check = false;
  } basis_opt;
  auto* basis_cmd = app.add_subcommand("basis", "Synthesise a basis and write P and P' as CSV");
  basis_cmd->add_option("--n", basis_opt.n, "Number of samples")->check(CLI::Range(2, 100000000))->capture_default_str();
  basis_cmd->add_option("--degree", basis_opt.degree, "Basis degree")->check(CLI::NonNegativeNumber)->capture_default_str();
  basis_cmd->add_option("--sigma-y", basis_opt.sigma_y)->check(CLI::PositiveNumber)->capture_default_str();
  basis_cmd->add_option("--sigma-dy", basis_opt.sigma_dy)->check(CLI::PositiveNumber)->capture_default_str();
  basis_cmd->add_option("--range", basis_opt.range, "Abscissa range: lo hi")->expected(2)->capture_default_str();
  basis_cmd->add_option("--output-prefix", basis_opt.prefix, "Writes <prefix>_p.csv, <prefix>_dp.csv")
      ->capture_default_str();
  basis_cmd->add_flag("--check", basis_opt.check, "Also write <prefix>_quality.json");

  // fit
  FitOptions fit_opt;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a dataset file or a synthetic realisation");
  fit_cmd->add_option("--input", fit_opt.input, "Dataset CSV (x,y,dy[,sigma_y,sigma_dy]); synthetic data if omitted");
  add_synthetic_options(fit_cmd, fit_opt.synthetic);
  fit_cmd->get_option("--sigma-y")->description("Noise sigma for synthetic data; global sigma for a dataset without a sigma_y column");
  fit_cmd->add_option("--degree", fit_opt.degree)->check(CLI::NonNegativeNumber)->capture_default_str();
  fit_cmd->add_option("--method", fit_opt.method)->check(CLI::IsMember({"dop", "vandermonde", "both"}))->capture_default_str();
  fit_cmd->add_option("--vandermonde-abscissa", fit_opt.abscissa)
      ->check(CLI::IsMember({"normalized", "raw"}))
      ->capture_default_str();
  fit_cmd->add_option("--output", fit_opt.output, "Fit CSV; a .json sidecar is written next to it")->capture_default_str();

  // compare
  FitOptions cmp_opt;
  cmp_opt.output = "compare.json";
  auto* cmp_cmd = app.add_subcommand("compare", "Fit with both bases and write a comparison summary");
  cmp_cmd->add_option("--input", cmp_opt.input, "Dataset CSV; synthetic data if omitted");
  add_synthetic_options(cmp_cmd, cmp_opt.synthetic);
  cmp_cmd->add_option("--degree", cmp_opt.degree)->check(CLI::NonNegativeNumber)->capture_default_str();
  cmp_cmd->add_option("--vandermonde-abscissa", cmp_opt.abscissa)
      ->check(CLI::IsMember({"normalized", "raw"}))
      ->capture_default_str();
  cmp_cmd->add_option("--output", cmp_opt.output)->capture_default_str();

  // montecarlo
  SyntheticOptions mc_syn;
  struct {
    int degree = 35;
    int n_iter = 200;
    std::optional<double> weight_sigma_y, weight_sigma_dy;
    std::string output = "montecarlo.json";
  } mc_opt;
  auto* mc_cmd = app.add_subcommand("montecarlo", "Monte-Carlo validation on synthetic data");
  add_synthetic_options(mc_cmd, mc_syn);
  mc_cmd->add_option("--degree", mc_opt.degree)->check(CLI::NonNegativeNumber)->capture_default_str();
  mc_cmd->add_option("--n-iter", mc_opt.n_iter)->check(CLI::PositiveNumber)->capture_default_str();
  mc_cmd->add_option("--weight-sigma-y", mc_opt.weight_sigma_y, "Sigma for the fit weights (defaults to --sigma-y)")
      ->check(CLI::PositiveNumber);
  mc_cmd->add_option("--weight-sigma-dy", mc_opt.weight_sigma_dy, "Sigma for the fit weights (defaults to --sigma-dy)")
      ->check(CLI::PositiveNumber);
  mc_cmd->add_option("--output", mc_opt.output)->capture_default_str();

  // sweep
  struct {
    std::string mode = "complete";
    std::string n = "5:5:50";
    std::vector<int> degrees;
    double sigma_y = 0.2, sigma_dy = 0.8;
    std::vector<double> range{-1.0, 1.0};
    std::string abscissa = "normalized";
    std::string output = "sweep.csv";
  } sw_opt;
  auto* sw_cmd = app.add_subcommand("sweep", "Numerical quality of complete or incomplete bases");
  sw_cmd->add_option("--mode", sw_opt.mode)->check(CLI::IsMember({"complete", "incomplete"}))->capture_default_str();
  sw_cmd->add_option("--n", sw_opt.n, "complete: start:step:stop or list; incomplete: one count")->capture_default_str();
  sw_cmd->add_option("--degrees", sw_opt.degrees, "Degrees for the incomplete sweep")->delimiter(',');
  sw_cmd->add_option("--sigma-y", sw_opt.sigma_y)->check(CLI::PositiveNumber)->capture_default_str();
  sw_cmd->add_option("--sigma-dy", sw_opt.sigma_dy)->check(CLI::PositiveNumber)->capture_default_str();
  sw_cmd->add_option("--range", sw_opt.range, "Abscissa range: lo hi")->expected(2)->capture_default_str();
  sw_cmd->add_option("--vandermonde-abscissa", sw_opt.abscissa)
      ->check(CLI::IsMember({"normalized", "raw"}))
      ->capture_default_str();
  sw_cmd->add_option("--output", sw_opt.output)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  // with --input, sigma flags given explicitly act as the dataset's global sigmas
  const auto forward_sigmas = [](CLI::App* cmd, FitOptions& o) {
    if (cmd->count("--sigma-y") > 0) o.sigma_y = o.synthetic.sigma_y;
    if (cmd->count("--sigma-dy") > 0) o.sigma_dy = o.synthetic.sigma_dy;
  };
  forward_sigmas(fit_cmd, fit_opt);
  forward_sigmas(cmp_cmd, cmp_opt);

  try {
    if (*basis_cmd) {
      if (basis_opt.range[0] >= basis_opt.range[1]) throw Error(ErrorCode::InvalidArgument, "--range needs lo < hi");
      if (basis_opt.degree > 2 * basis_opt.n - 1) {
        throw Error(ErrorCode::DegreeOutOfRange, "--degree must be at most 2n-1 = " + std::to_string(2 * basis_opt.n - 1));
      }
      const Eigen::VectorXd x = equally_spaced(basis_opt.n, basis_opt.range[0], basis_opt.range[1]);
      const BasisSet basis =
          synthesize_basis(x, WeightModel::from_scalar(basis_opt.n, basis_opt.sigma_y, basis_opt.sigma_dy), basis_opt.degree);
      write_text(basis_opt.prefix + "_p.csv",
                 csv_of([&](std::ostream& os) { write_basis_csv(os, basis.grid().x_raw, basis.p(), "p"); }));
      write_text(basis_opt.prefix + "_dp.csv",
                 csv_of([&](std::ostream& os) { write_basis_csv(os, basis.grid().x_raw, basis.p_prime(), "dp"); }));
      out << "wrote " << basis_opt.prefix << "_p.csv, " << basis_opt.prefix << "_dp.csv\n";
      if (basis_opt.check) {
        const QualityReport q = quality_measures(basis);
        nlohmann::json j = to_json(q);
        j["n"] = basis_opt.n;
        j["degree"] = basis_opt.degree;
        write_text(basis_opt.prefix + "_quality.json", j.dump(2) + "\n");
        out << "eps_frob = " << q.eps_frob << ", eps_rank = " << q.eps_rank << '\n';
      }
      return kSuccess;
    }

    if (*fit_cmd) {
      const FitInput in = load_fit_input(fit_opt, err);
      if (fit_opt.degree > 2 * in.x_raw.size() - 1) {
        throw Error(ErrorCode::DegreeOutOfRange, "--degree must be at most 2n-1");
      }
      const AbscissaMode mode = parse_abscissa(fit_opt.abscissa);
      const std::filesystem::path path(fit_opt.output);
      FitMetadata meta = in.meta;
      if (fit_opt.method == "dop") {
        const MethodOutcome m = run_dop(in, fit_opt.degree);
        write_method(path, in, m, meta);
        out << residual_summary(in, m).dump() << '\n';
      } else if (fit_opt.method == "vandermonde") {
        const MethodOutcome m = run_vandermonde(in, fit_opt.degree, mode);
        meta.method = "vandermonde";
        write_method(path, in, m, meta);
        out << residual_summary(in, m).dump() << '\n';
      } else {
        std::optional<MethodOutcome> dop, vdm;
        const nlohmann::json summary = compare_methods(in, fit_opt.degree, mode, &dop, &vdm);
        write_method(path, in, *dop, meta);
        if (vdm) {
          meta.method = "vandermonde";
          write_method(stem_with(path, "_vandermonde"), in, *vdm, meta);
        }
        std::filesystem::path summary_path = stem_with(path, "_compare");
        summary_path.replace_extension(".json");
        write_text(summary_path, summary.dump(2) + "\n");
        out << summary.dump() << '\n';
      }
      return kSuccess;
    }

    if (*cmp_cmd) {
      const FitInput in = load_fit_input(cmp_opt, err);
      if (cmp_opt.degree > 2 * in.x_raw.size() - 1) {
        throw Error(ErrorCode::DegreeOutOfRange, "--degree must be at most 2n-1");
      }
      const nlohmann::json summary = compare_methods(in, cmp_opt.degree, parse_abscissa(cmp_opt.abscissa));
      write_text(cmp_opt.output, summary.dump(2) + "\n");
      out << summary.dump() << '\n';
      return kSuccess;
    }

    if (*mc_cmd) {
      SyntheticSpec spec = mc_syn.to_spec();
      spec.weight_sigma_y = mc_opt.weight_sigma_y;
      spec.weight_sigma_dy = mc_opt.weight_sigma_dy;
      if (mc_opt.degree > 2 * spec.n - 1) throw Error(ErrorCode::DegreeOutOfRange, "--degree must be at most 2n-1");
      const MonteCarloResult r = run_monte_carlo(spec, mc_opt.degree, mc_opt.n_iter);
      write_text(mc_opt.output, to_json(r).dump(2) + "\n");
      out << "mean std(y_hat - y_tilde) = " << r.mean_std_ry << ", mean std(dy_hat - dy_tilde) = " << r.mean_std_rdy
          << '\n';
      return kSuccess;
    }

    if (*sw_cmd) {
      SweepGridOptions grid;
      grid.x_lo = sw_opt.range[0];
      grid.x_hi = sw_opt.range[1];
      grid.vandermonde_mode = parse_abscissa(sw_opt.abscissa);
      if (!(grid.x_lo < grid.x_hi)) throw Error(ErrorCode::InvalidArgument, "--range needs lo < hi");
      std::vector<SweepRow> rows;
      if (sw_opt.mode == "complete") {
        rows = sweep_complete(parse_n_list(sw_opt.n), sw_opt.sigma_y, sw_opt.sigma_dy, grid);
      } else {
        const std::vector<Eigen::Index> ns = parse_n_list(sw_opt.n);
        if (ns.size() != 1) throw Error(ErrorCode::InvalidArgument, "incomplete sweep takes a single --n");
        if (sw_opt.degrees.empty()) throw Error(ErrorCode::InvalidArgument, "incomplete sweep needs --degrees");
        rows = sweep_incomplete(ns[0], sw_opt.degrees, sw_opt.sigma_y, sw_opt.sigma_dy, grid);
      }
      write_text(sw_opt.output, csv_of([&](std::ostream& os) { write_sweep_csv(os, rows); }));
      out << "wrote " << rows.size() << " sweep rows to " << sw_opt.output << '\n';
      return kSuccess;
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    switch (e.kind()) {
      case ErrorKind::Usage: return kUsage;
      case ErrorKind::Data: return kData;
      case ErrorKind::Numerical: return kNumerical;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}

}  // namespace dopfit::cli
