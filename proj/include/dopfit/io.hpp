#pragma once

#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "dopfit/error.hpp"
#include "dopfit/fit.hpp"
#include "dopfit/grid.hpp"
#include "dopfit/quality.hpp"
#include "dopfit/synthetic.hpp"
#include "dopfit/weights.hpp"

namespace dopfit {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kDatasetCsvHeader = "x,y,dy,sigma_y,sigma_dy";
inline constexpr const char* kFitCsvHeader = "x,y_tilde,dy_tilde,sd_y,sd_dy";

/// A parsed dataset file: abscissae, observations and diagonal weights.
struct Dataset {
  Eigen::VectorXd x_raw;
  Observations obs;
  Eigen::VectorXd sigma_y;
  Eigen::VectorXd sigma_dy;
  bool per_sample_sigma_y = false;
  bool per_sample_sigma_dy = false;

  Eigen::Index n() const noexcept { return x_raw.size(); }
  WeightModel weights() const { return WeightModel::from_sigmas(sigma_y, sigma_dy); }
};

/// Rows of a fit output file.
struct FitTable {
  Eigen::VectorXd x, y_tilde, dy_tilde, sd_y, sd_dy;
};

/// Metadata stored next to a fit. Unset optionals serialise as null.
struct FitMetadata {
  std::string method = "dop";
  std::optional<double> sigma_y;
  std::optional<double> sigma_dy;
  std::optional<std::uint64_t> seed;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double parse_number(std::string_view field, std::size_t line_no, std::string_view column) {
  const auto fail = [&](const std::string& why) {
    return Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ", column '" + std::string(column) +
                                            "': " + why);
  };
  if (field.empty()) throw fail("missing value");
  const std::string text(field);
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size()) throw fail("'" + text + "' is not a number");
  if (std::isnan(v)) throw fail("NaN is not allowed");
  if (errno == ERANGE && std::isinf(v)) throw fail("'" + text + "' overflows");
  return v;
}

inline void write_double(std::ostream& os, double v) { write_number(os, v); }

inline nlohmann::json finite_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  return os;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  return is;
}

/// Reads a comma-separated table with a header line. '#' lines and blank lines
/// are skipped; CRLF is accepted. Returns column name -> values and the source
/// line number of each row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

inline CsvTable read_csv(std::istream& is) {
  CsvTable table;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    auto fields = split_fields(view);
    if (!have_header) {
      for (auto f : fields) table.header.emplace_back(f);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected " +
                                             std::to_string(table.header.size()) + " fields, found " +
                                             std::to_string(fields.size()));
    }
    table.rows.emplace_back(fields.begin(), fields.end());
    table.line_numbers.push_back(line_no);
  }
  if (!have_header) throw Error(ErrorCode::ParseError, "file has no header line");
  return table;
}

}  // namespace detail

/// Parses a dataset with header `x,y,dy[,sigma_y,sigma_dy]`. Columns missing
/// from the file take the global sigma; a missing column without a global
/// sigma is an error. A sigma of `inf` zeroes that sample's weight.
inline Dataset read_dataset(std::istream& is, std::optional<double> global_sigma_y = std::nullopt,
                            std::optional<double> global_sigma_dy = std::nullopt) {
  const detail::CsvTable table = detail::read_csv(is);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    const std::string& name = table.header[i];
    if (name != "x" && name != "y" && name != "dy" && name != "sigma_y" && name != "sigma_dy") {
      throw Error(ErrorCode::ParseError, "unknown column '" + name + "' (expected " + kDatasetCsvHeader + ")");
    }
    if (!index.emplace(name, i).second) throw Error(ErrorCode::ParseError, "duplicate column '" + name + "'");
  }
  for (const char* required : {"x", "y", "dy"}) {
    if (!index.contains(required)) {
      throw Error(ErrorCode::ParseError, std::string("missing required column '") + required + "'");
    }
  }

  const auto n = static_cast<Eigen::Index>(table.rows.size());
  Dataset ds;
  ds.x_raw.resize(n);
  ds.obs.y_hat.resize(n);
  ds.obs.y_hat_prime.resize(n);
  ds.sigma_y.resize(n);
  ds.sigma_dy.resize(n);
  ds.per_sample_sigma_y = index.contains("sigma_y");
  ds.per_sample_sigma_dy = index.contains("sigma_dy");
  if (!ds.per_sample_sigma_y && !global_sigma_y) {
    throw Error(ErrorCode::InvalidArgument, "no sigma_y column and no global sigma_y given");
  }
  if (!ds.per_sample_sigma_dy && !global_sigma_dy) {
    throw Error(ErrorCode::InvalidArgument, "no sigma_dy column and no global sigma_dy given");
  }

  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = table.rows[static_cast<std::size_t>(r)];
    const std::size_t line_no = table.line_numbers[static_cast<std::size_t>(r)];
    const auto value = [&](const char* column) {
      const double v = detail::parse_number(row[index.at(column)], line_no, column);
      return v;
    };
    ds.x_raw[r] = value("x");
    ds.obs.y_hat[r] = value("y");
    ds.obs.y_hat_prime[r] = value("dy");
    for (const char* column : {"x", "y", "dy"}) {
      if (std::isinf(value(column))) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ", column '" + column +
                                               "': value must be finite");
      }
    }
    ds.sigma_y[r] = ds.per_sample_sigma_y ? value("sigma_y") : *global_sigma_y;
    ds.sigma_dy[r] = ds.per_sample_sigma_dy ? value("sigma_dy") : *global_sigma_dy;
    for (const double s : {ds.sigma_y[r], ds.sigma_dy[r]}) {
      if (s < 0.0) {
        throw Error(ErrorCode::NegativeSigma, "line " + std::to_string(line_no) + ": sigma must be >= 0");
      }
      if (s == 0.0) {
        throw Error(ErrorCode::ZeroSigma, "line " + std::to_string(line_no) +
                                              ": sigma = 0 would be an exact constraint, which is not "
                                              "supported; use inf to ignore a sample");
      }
    }
  }
  if (n < 2) throw Error(ErrorCode::TooFewSamples, "dataset needs at least 2 rows");
  for (Eigen::Index r = 1; r < n; ++r) {
    if (!(ds.x_raw[r] > ds.x_raw[r - 1])) {
      const std::size_t line_no = table.line_numbers[static_cast<std::size_t>(r)];
      throw Error(ds.x_raw[r] == ds.x_raw[r - 1] ? ErrorCode::DuplicateAbscissa : ErrorCode::NonMonotonicAbscissa,
                  "line " + std::to_string(line_no) + ": x must be strictly increasing");
    }
  }
  return ds;
}

inline Dataset read_dataset(const std::filesystem::path& path, std::optional<double> global_sigma_y = std::nullopt,
                            std::optional<double> global_sigma_dy = std::nullopt) {
  std::ifstream is = detail::open_input(path);
  return read_dataset(is, global_sigma_y, global_sigma_dy);
}

/// Writes x, y, dy and (optionally) per-sample sigmas at full precision.
inline void write_dataset(std::ostream& os, const Eigen::VectorXd& x, const Observations& obs,
                          const Eigen::VectorXd* sigma_y = nullptr, const Eigen::VectorXd* sigma_dy = nullptr) {
  const bool sigmas = sigma_y != nullptr && sigma_dy != nullptr;
  os << (sigmas ? kDatasetCsvHeader : "x,y,dy") << '\n';
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    detail::write_double(os, x[i]);
    os << ',';
    detail::write_double(os, obs.y_hat[i]);
    os << ',';
    detail::write_double(os, obs.y_hat_prime[i]);
    if (sigmas) {
      os << ',';
      detail::write_double(os, (*sigma_y)[i]);
      os << ',';
      detail::write_double(os, (*sigma_dy)[i]);
    }
    os << '\n';
  }
}

inline void write_fit_csv(std::ostream& os, const Eigen::VectorXd& x, const Eigen::VectorXd& y_tilde,
                          const Eigen::VectorXd& dy_tilde, const Eigen::VectorXd& sd_y, const Eigen::VectorXd& sd_dy) {
  os << kFitCsvHeader << '\n';
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    for (const double v : {x[i], y_tilde[i], dy_tilde[i], sd_y[i]}) {
      detail::write_double(os, v);
      os << ',';
    }
    detail::write_double(os, sd_dy[i]);
    os << '\n';
  }
}

inline nlohmann::json fit_json(const Eigen::VectorXd& gamma, Eigen::Index n, const FitMetadata& meta) {
  nlohmann::json j;
  j["gamma"] = std::vector<double>(gamma.data(), gamma.data() + gamma.size());
  j["degree"] = gamma.size() - 1;
  j["n"] = n;
  j["method"] = meta.method;
  j["sigma_y"] = meta.sigma_y ? nlohmann::json(*meta.sigma_y) : nlohmann::json(nullptr);
  j["sigma_dy"] = meta.sigma_dy ? nlohmann::json(*meta.sigma_dy) : nlohmann::json(nullptr);
  j["seed"] = meta.seed ? nlohmann::json(*meta.seed) : nlohmann::json(nullptr);
  j["version"] = kVersion;
  return j;
}

/// Sidecar path of a fit CSV: same stem, `.json` extension.
inline std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p.replace_extension(".json");
  return p;
}

/// Writes the fit CSV to `path` and the coefficient sidecar next to it.
inline void write_fit(const std::filesystem::path& path, const HermiteFit& fit, const Grid& grid,
                      const FitMetadata& meta = {}) {
  {
    std::ofstream os = detail::open_output(path);
    write_fit_csv(os, grid.x_raw, fit.y_tilde, fit.y_tilde_prime, fit.sd_y(), fit.sd_dy());
    if (!os) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
  }
  std::ofstream js = detail::open_output(sidecar_path(path));
  js << fit_json(fit.gamma, grid.n(), meta).dump(2) << '\n';
  if (!js) throw Error(ErrorCode::IoError, "failed writing sidecar for '" + path.string() + "'");
}

inline FitTable read_fit_csv(std::istream& is) {
  const detail::CsvTable table = detail::read_csv(is);
  std::string header;
  for (std::size_t i = 0; i < table.header.size(); ++i) header += (i ? "," : "") + table.header[i];
  if (header != kFitCsvHeader) {
    throw Error(ErrorCode::ParseError, "fit header must be '" + std::string(kFitCsvHeader) + "'");
  }
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  FitTable t;
  for (auto* v : {&t.x, &t.y_tilde, &t.dy_tilde, &t.sd_y, &t.sd_dy}) v->resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = table.rows[static_cast<std::size_t>(r)];
    const std::size_t line_no = table.line_numbers[static_cast<std::size_t>(r)];
    Eigen::VectorXd* cols[] = {&t.x, &t.y_tilde, &t.dy_tilde, &t.sd_y, &t.sd_dy};
    for (std::size_t c = 0; c < 5; ++c) (*cols[c])[r] = detail::parse_number(row[c], line_no, table.header[c]);
  }
  return t;
}

inline FitTable read_fit_csv(const std::filesystem::path& path) {
  std::ifstream is = detail::open_input(path);
  return read_fit_csv(is);
}

/// Basis columns for plotting: `x,<prefix>0,...,<prefix>d`.
inline void write_basis_csv(std::ostream& os, const Eigen::VectorXd& x, const Eigen::MatrixXd& columns,
                            std::string_view prefix) {
  os << 'x';
  for (Eigen::Index j = 0; j < columns.cols(); ++j) os << ',' << prefix << j;
  os << '\n';
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    detail::write_double(os, x[i]);
    for (Eigen::Index j = 0; j < columns.cols(); ++j) {
      os << ',';
      detail::write_double(os, columns(i, j));
    }
    os << '\n';
  }
}

inline nlohmann::json to_json(const QualityReport& q) {
  return {
      {"eps_max", q.eps_max},
      {"eps_frob", q.eps_frob},
      {"eps_det", q.eps_det},
      {"eps_cond", detail::finite_or_null(q.eps_cond)},
      {"eps_rank", q.eps_rank},
      {"eta_max", detail::finite_or_null(q.eta_max())},
      {"eta_frob", detail::finite_or_null(q.eta_frob())},
      {"eta_det", detail::finite_or_null(q.eta_det())},
      {"eta_cond", detail::finite_or_null(q.eta_cond())},
      {"eta_rank", detail::finite_or_null(q.eta_rank())},
      {"failed", q.failed},
  };
}

inline nlohmann::json to_json(const IterationStats& s) {
  return {
      {"std_ry", s.std_ry},           {"std_rdy", s.std_rdy},       {"std_noise_y", s.std_noise_y},
      {"std_noise_dy", s.std_noise_dy}, {"std_err_y", s.std_err_y}, {"std_err_dy", s.std_err_dy},
      {"std_whitened", s.std_whitened},
  };
}

inline nlohmann::json to_json(const SyntheticSpec& spec) {
  nlohmann::json j = {
      {"function", to_string(spec.function)},
      {"range", {spec.x_lo, spec.x_hi}},
      {"n", spec.n},
      {"sigma_y", spec.sigma_y},
      {"sigma_dy", spec.sigma_dy},
      {"seed", spec.seed},
  };
  if (spec.function == SyntheticFunction::Polynomial) j["coefficients"] = spec.coefficients;
  if (spec.weight_sigma_y) j["weight_sigma_y"] = *spec.weight_sigma_y;
  if (spec.weight_sigma_dy) j["weight_sigma_dy"] = *spec.weight_sigma_dy;
  return j;
}

/// Spec echo, aggregate means and the per-iteration array. No timestamps, so
/// equal inputs serialise to equal bytes.
inline nlohmann::json to_json(const MonteCarloResult& r) {
  nlohmann::json per = nlohmann::json::array();
  for (const IterationStats& s : r.per_iteration) per.push_back(to_json(s));
  return {
      {"spec", to_json(r.spec)},
      {"degree", r.degree},
      {"n_iter", r.n_iter},
      {"seed", r.seed},
      {"mean_std_ry", r.mean_std_ry},
      {"mean_std_rdy", r.mean_std_rdy},
      {"mean", to_json(r.mean)},
      {"per_iteration", std::move(per)},
      {"version", kVersion},
  };
}

}  // namespace dopfit
