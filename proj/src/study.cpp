#include "fracsim/study.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "fracsim/parallel.hpp"
#include "fracsim/spectral.hpp"

namespace fracsim {
namespace {

using json = nlohmann::json;

// Empirical rates may rise with gamma by this much before a warning is issued;
// covers the Monte Carlo scatter of desk-scale studies.
constexpr double kMonotoneSlack = 0.05;

std::vector<std::size_t> powers_of_two(std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> v;
  for (std::size_t d = lo; d <= hi; d *= 2) v.push_back(d);
  return v;
}

[[noreturn]] void config_fail(const std::string& path, const std::string& msg) {
  throw ConfigError(path + ": " + msg);
}

double get_real(const std::string& path, const json& v) {
  if (!v.is_number()) config_fail(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) config_fail(path, "expected a finite number");
  return d;
}

std::uint64_t get_uint(const std::string& path, const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) {
    const auto i = v.get<std::int64_t>();
    if (i >= 0) return static_cast<std::uint64_t>(i);
  }
  config_fail(path, "expected a nonnegative integer");
}

bool get_bool(const std::string& path, const json& v) {
  if (!v.is_boolean()) config_fail(path, "expected true or false");
  return v.get<bool>();
}

std::string get_string(const std::string& path, const json& v) {
  if (!v.is_string()) config_fail(path, "expected a string");
  return v.get<std::string>();
}

const json& get_array(const std::string& path, const json& v) {
  if (!v.is_array()) config_fail(path, "expected an array");
  return v;
}

Method parse_method(const std::string& path, const json& v) {
  const auto s = get_string(path, v);
  if (s == "spectral") return Method::spectral;
  if (s == "fem") return Method::fem;
  config_fail(path, "unknown method '" + s + "' (expected spectral or fem)");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string context(std::size_t sample, std::size_t dim, std::optional<std::size_t> mode) {
  std::ostringstream os;
  os << "sample " << sample << ", dim " << dim << ", mode ";
  if (mode)
    os << *mode;
  else
    os << "-";
  return os.str();
}

template <class Fn>
void with_context(const std::string& where, Fn&& fn) {
  try {
    fn();
  } catch (const StudyError&) {
    throw;
  } catch (const AccuracyError& e) {
    throw StudyError(where + ": " + e.what(), true);
  } catch (const NumericalError& e) {
    throw StudyError(where + ": " + e.what(), true);
  } catch (const std::exception& e) {
    throw StudyError(where + ": " + e.what(), false);
  }
}

std::vector<std::size_t> measurement_nodes(const StudyConfig& cfg, const TimeGrid& grid) {
  std::vector<std::size_t> idx;
  for (std::size_t m = 0; m <= grid.steps(); m += cfg.measurement_stride) idx.push_back(m);
  return idx;
}

}  // namespace

StudyConfig default_config(Method method) {
  StudyConfig c;
  c.method = method;
  c.gammas = {0.0, 0.025, 0.05, 0.075, 0.1};
  c.p = 2.0;
  c.T = 1.0;
  c.seed = 20240601;
  c.measurement_stride = 1;
  c.dims = powers_of_two(2, 64);
  if (method == Method::spectral) {
    c.alpha = 0.35;
    c.dt = 0.002;
    c.ref_dim = 1024;
    c.samples = 64;
    c.output_path = "spectral_study.csv";
  } else {
    c.alpha = 0.2;
    c.dt = 0.001;
    c.ref_dim = 512;
    c.samples = 128;
    c.output_path = "fem_study.csv";
  }
  return c;
}

TimeGrid StudyConfig::grid() const { return TimeGrid::from_step(T, dt); }

void StudyConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) config_fail("$.alpha", "must lie in (0, 1), got " + fmt(alpha));
  if (gammas.empty()) config_fail("$.gammas", "needs at least one exponent");
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    const auto path = "$.gammas[" + std::to_string(i) + "]";
    if (!(gammas[i] >= 0.0 && gammas[i] < 0.5)) config_fail(path, "must lie in [0, 1/2)");
    if (i > 0 && !(gammas[i] > gammas[i - 1])) config_fail(path, "gammas must be strictly increasing");
  }
  if (!(p > 0.0)) config_fail("$.p", "must be positive");
  if (!(T > 0.0)) config_fail("$.T", "must be positive");
  if (!(dt > 0.0 && dt <= T)) config_fail("$.dt", "must lie in (0, T]");
  const double steps = std::round(T / dt);
  if (std::abs(steps * dt - T) > 1e-12 * T) config_fail("$.dt", "must divide T");
  const auto M = static_cast<std::size_t>(steps);
  if (dims.size() < 2) config_fail("$.dims", "needs at least two dimensions");
  const std::size_t min_dim = method == Method::fem ? 2 : 1;
  for (std::size_t i = 0; i < dims.size(); ++i) {
    const auto path = "$.dims[" + std::to_string(i) + "]";
    if (dims[i] < min_dim) config_fail(path, "must be at least " + std::to_string(min_dim));
    if (i > 0 && dims[i] <= dims[i - 1]) config_fail(path, "dims must be strictly increasing");
    if (method == Method::fem && ref_dim % dims[i] != 0)
      config_fail(path, "must divide ref_dim so the meshes are nested");
  }
  if (ref_dim <= dims.back()) config_fail("$.ref_dim", "must exceed every entry of dims");
  if (samples < 1 || samples > std::numeric_limits<std::uint32_t>::max())
    config_fail("$.samples", "must lie in [1, 2^32)");
  if (measurement_stride < 1 || M % measurement_stride != 0)
    config_fail("$.measurement_stride", "must be >= 1 and divide the number of time steps");
  if (output_path.empty()) config_fail("$.output_path", "must not be empty");
  if (!(covariance_rel_tol > 0.0 && covariance_rel_tol < 1.0))
    config_fail("$.covariance_rel_tol", "must lie in (0, 1)");
  if (memory_budget_mb < 1) config_fail("$.memory_budget_mb", "must be at least 1");
}

StudyConfig parse_config(std::string_view text, std::optional<Method> fallback) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    config_fail("$", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) config_fail("$", "expected a JSON object");

  std::optional<Method> method;
  if (doc.contains("method")) method = parse_method("$.method", doc["method"]);
  if (method && fallback && *method != *fallback)
    config_fail("$.method", "document says '" + std::string(method_name(*method)) +
                                "' but the command runs '" + std::string(method_name(*fallback)) + "'");
  if (!method) method = fallback;
  if (!method) config_fail("$.method", "missing (expected spectral or fem)");

  StudyConfig c = default_config(*method);
  for (const auto& [key, v] : doc.items()) {
    const std::string path = "$." + key;
    if (key == "method") {
    } else if (key == "alpha") {
      c.alpha = get_real(path, v);
    } else if (key == "gammas") {
      c.gammas.clear();
      const auto& arr = get_array(path, v);
      for (std::size_t i = 0; i < arr.size(); ++i)
        c.gammas.push_back(get_real(path + "[" + std::to_string(i) + "]", arr[i]));
    } else if (key == "p") {
      c.p = get_real(path, v);
    } else if (key == "T") {
      c.T = get_real(path, v);
    } else if (key == "dt") {
      c.dt = get_real(path, v);
    } else if (key == "dims") {
      c.dims.clear();
      const auto& arr = get_array(path, v);
      for (std::size_t i = 0; i < arr.size(); ++i)
        c.dims.push_back(get_uint(path + "[" + std::to_string(i) + "]", arr[i]));
    } else if (key == "ref_dim") {
      c.ref_dim = get_uint(path, v);
    } else if (key == "samples") {
      c.samples = get_uint(path, v);
    } else if (key == "seed") {
      c.seed = get_uint(path, v);
    } else if (key == "measurement_stride") {
      c.measurement_stride = get_uint(path, v);
    } else if (key == "output_path") {
      c.output_path = get_string(path, v);
    } else if (key == "record_wall_time") {
      c.record_wall_time = get_bool(path, v);
    } else if (key == "cache_dir") {
      c.cache_dir = get_string(path, v);
    } else if (key == "trace_dir") {
      c.trace_dir = get_string(path, v);
    } else if (key == "initial_datum") {
      const auto s = get_string(path, v);
      if (s == "projection")
        c.initial = InitialDatum::sine_projection;
      else if (s == "interpolation")
        c.initial = InitialDatum::sine_interpolation;
      else if (s == "zero")
        c.initial = InitialDatum::zero;
      else
        config_fail(path, "expected 'projection', 'interpolation' or 'zero'");
    } else if (key == "covariance_rel_tol") {
      c.covariance_rel_tol = get_real(path, v);
    } else if (key == "memory_budget_mb") {
      c.memory_budget_mb = get_uint(path, v);
    } else {
      config_fail(path, "unknown key");
    }
  }
  c.validate();
  return c;
}

StudyConfig load_config(const std::filesystem::path& path, std::optional<Method> fallback) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), fallback);
}

// ---------------------------------------------------------------------------
// Spectral study
//
// Modes are the outer loop: each worker builds one mode's covariance factor
// and draws that mode for every sample of the batch, so factors never have to
// be held for all modes at once. The errors of all dimensions then follow from
// tail Gram matrices G^(N) = sum_{k>N} c_k c_k^T of the reference coefficients.

SampleNorms spectral_sample_norms(const StudyConfig& cfg, std::size_t threads) {
  const TimeGrid grid = cfg.grid();
  const auto nodes = measurement_nodes(cfg, grid);
  const std::size_t n = nodes.size();
  const std::size_t ref = cfg.ref_dim;
  std::vector<double> times;
  for (auto m : nodes) times.push_back(grid[m]);

  const SpectralParams params = SpectralParams::sine_initial(cfg.alpha, ref, grid);
  CovarianceOptions copt;
  copt.rel_tol = cfg.covariance_rel_tol;
  std::optional<CovarianceCache> cache;
  if (!cfg.cache_dir.empty()) cache.emplace(cfg.cache_dir);
  const double rho = params.kernel_order();

  const std::size_t per_sample = n * ref * sizeof(double);
  const std::size_t budget = cfg.memory_budget_mb << 20;
  const std::size_t batch = std::clamp<std::size_t>(budget / per_sample, 1, cfg.samples);

  SampleNorms norms(cfg.samples,
                    std::vector<std::vector<double>>(cfg.gammas.size(),
                                                     std::vector<double>(cfg.dims.size())));
  for (std::size_t first = 0; first < cfg.samples; first += batch) {
    const std::size_t count = std::min(batch, cfg.samples - first);
    std::vector<RowMatrix> coeffs(count, RowMatrix(static_cast<long>(n), static_cast<long>(ref)));

    parallel_for(ref, threads, [&](std::size_t col) {
      const std::size_t k = col + 1;
      with_context(context(first, ref, k), [&] {
        std::optional<CovarianceFactor> cf;
        if (cache) cf = cache->load(rho, grid, k, copt);
        if (!cf) {
          cf = factor_covariance(mode_covariance(k, params, copt));
          if (cache) cache->store(rho, grid, *cf, copt);
        }
        if (!cf->triangular) {
          const double res = factor_residual(*cf);
          const double bound = std::max(1e-10, 1e-8 * cf->R.cwiseAbs().maxCoeff());
          if (res > bound)
            throw AccuracyError("covariance factor does not reproduce R", res);
        }
        const double u0 = params.u0_coeffs[col];
        const double lambda = laplacian_eigenvalue(k);
        std::vector<double> det(n, 0.0);
        for (std::size_t r = 0; r < n; ++r)
          det[r] = nodes[r] == 0 ? u0 : (u0 == 0.0 ? 0.0 : resolvent_diag(rho, 1.0, lambda, grid[nodes[r]]) * u0);
        for (std::size_t s = 0; s < count; ++s) {
          RngStream stream = SampleRng(cfg.seed, static_cast<std::uint32_t>(first + s))
                                 .stream(static_cast<std::uint32_t>(k));
          const auto path = sample_mode_path(*cf, stream);
          for (std::size_t r = 0; r < n; ++r)
            coeffs[s](static_cast<long>(r), static_cast<long>(col)) =
                det[r] + (nodes[r] == 0 ? 0.0 : path[nodes[r] - 1]);
        }
      });
    });

    parallel_for(count, threads, [&](std::size_t s) {
      with_context(context(first + s, cfg.dims.front(), std::nullopt), [&] {
        const RowMatrix& c = coeffs[s];
        Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(static_cast<long>(n), static_cast<long>(n));
        std::size_t hi = ref;
        for (std::size_t d = cfg.dims.size(); d-- > 0;) {
          const std::size_t lo = cfg.dims[d];
          const auto block = c.middleCols(static_cast<long>(lo), static_cast<long>(hi - lo));
          gram.noalias() += block * block.transpose();
          hi = lo;
          const auto v = gram_holder_norms(gram.data(), n, times, cfg.gammas);
          for (std::size_t g = 0; g < v.size(); ++g) norms[first + s][g][d] = v[g];
        }
      });
    });
  }
  return norms;
}

// ---------------------------------------------------------------------------
// FEM study
//
// Samples run in parallel. Every mesh of a sample is driven by the same
// Brownian increments; the error of each coarse mesh is measured against the
// reference mesh after linear prolongation. Pairwise L^2 differences come from
// the Gram matrix of E = L^T D, where Mass = L L^T and D holds the nodal
// differences, so ||D_i - D_j||^2 = G_ii + G_jj - 2 G_ij.

SampleNorms fem_sample_norms(const StudyConfig& cfg, std::size_t threads) {
  const TimeGrid grid = cfg.grid();
  const auto nodes = measurement_nodes(cfg, grid);
  const std::size_t n = nodes.size();
  std::vector<double> times;
  for (auto m : nodes) times.push_back(grid[m]);
  const Mesh1D fine_mesh(cfg.ref_dim);
  const std::size_t nf = fine_mesh.interior();

  // Mass = L D L^T with unit lower-bidiagonal L.
  const FemMatrices fm = assemble(fine_mesh);
  std::vector<double> piv(nf), sub(nf, 0.0);
  piv[0] = fm.mass.diag[0];
  for (std::size_t i = 1; i < nf; ++i) {
    sub[i - 1] = fm.mass.off[i - 1] / piv[i - 1];
    piv[i] = fm.mass.diag[i] - sub[i - 1] * fm.mass.off[i - 1];
  }
  std::vector<double> root(nf);
  for (std::size_t i = 0; i < nf; ++i) root[i] = std::sqrt(piv[i]);

  if (!cfg.trace_dir.empty()) std::filesystem::create_directories(cfg.trace_dir);

  SampleNorms norms(cfg.samples,
                    std::vector<std::vector<double>>(cfg.gammas.size(),
                                                     std::vector<double>(cfg.dims.size())));
  parallel_for(cfg.samples, threads, [&](std::size_t s) {
    const SampleRng rng(cfg.seed, static_cast<std::uint32_t>(s));
    const auto inc = brownian_increments(rng, grid);
    FemSolution fine;
    with_context(context(s, cfg.ref_dim, std::nullopt), [&] {
      fine = simulate_fem(fine_mesh, grid, cfg.alpha, inc, cfg.initial);
      if (!cfg.trace_dir.empty()) {
        char name[64];
        std::snprintf(name, sizeof name, "fem_ref_s%06zu.bin", s);
        write_fem_trace(std::filesystem::path(cfg.trace_dir) / name, fine,
                        static_cast<std::uint32_t>(s));
      }
    });
    RowMatrix e(static_cast<long>(n), static_cast<long>(nf));
    std::vector<double> diff(nf);
    for (std::size_t d = 0; d < cfg.dims.size(); ++d) {
      with_context(context(s, cfg.dims[d], std::nullopt), [&] {
        const Mesh1D mesh(cfg.dims[d]);
        const FemSolution coarse = simulate_fem(mesh, grid, cfg.alpha, inc, cfg.initial);
        for (std::size_t r = 0; r < n; ++r) {
          const auto row = static_cast<long>(nodes[r]);
          const auto p = prolong(mesh, std::span(coarse.nodal.row(row).data(), mesh.interior()),
                                 fine_mesh);
          const double* f = fine.nodal.row(row).data();
          for (std::size_t i = 0; i < nf; ++i) diff[i] = f[i] - p[i];
          double* out = e.row(static_cast<long>(r)).data();
          for (std::size_t i = 0; i < nf; ++i)
            out[i] = root[i] * (diff[i] + (i + 1 < nf ? sub[i] * diff[i + 1] : 0.0));
        }
        const Eigen::MatrixXd gram = e * e.transpose();
        const auto v = gram_holder_norms(gram.data(), n, times, cfg.gammas);
        for (std::size_t g = 0; g < v.size(); ++g) norms[s][g][d] = v[g];
      });
    }
  });
  return norms;
}

// ---------------------------------------------------------------------------

namespace {

void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string csv_header() {
  return "# fracsim results schema=" + std::to_string(kResultsSchema) + "\n" +
         std::string(kCsvColumns) + "\n";
}

}  // namespace

StudyResult run_study(const StudyConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  StudyResult res;
  res.config = cfg;
  std::filesystem::path csv = cfg.output_path;
  if (!opts.out_dir.empty()) csv = opts.out_dir / csv.filename();
  if (csv.has_parent_path()) std::filesystem::create_directories(csv.parent_path());
  res.csv_path = csv;
  res.summary_path = csv.parent_path() / (csv.stem().string() + ".summary.json");

  // A header without footer marks the file as incomplete until the study ends.
  write_text_atomic(csv, csv_header());

  const std::string method(method_name(cfg.method));
  if (opts.log)
    *opts.log << "fracsim: " << method << " study, alpha=" << cfg.alpha << ", "
              << cfg.samples << " samples, ref_dim=" << cfg.ref_dim << ", dt=" << cfg.dt << "\n";

  const auto t0 = std::chrono::steady_clock::now();
  const SampleNorms norms = cfg.method == Method::spectral
                                ? spectral_sample_norms(cfg, opts.threads)
                                : fem_sample_norms(cfg, opts.threads);
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::size_t G = cfg.gammas.size();
  const std::size_t D = cfg.dims.size();
  res.errors.assign(G, std::vector<double>(D));
  std::vector<double> dims(cfg.dims.begin(), cfg.dims.end());
  std::vector<double> column(cfg.samples);
  for (std::size_t g = 0; g < G; ++g) {
    for (std::size_t d = 0; d < D; ++d) {
      for (std::size_t s = 0; s < cfg.samples; ++s) column[s] = norms[s][g][d];
      res.errors[g][d] = lp_omega_estimate(column, cfg.p);
      if (!(res.errors[g][d] > 0.0))
        throw StudyError("error estimate for gamma=" + fmt(cfg.gammas[g]) + ", dim " +
                             std::to_string(cfg.dims[d]) + " is not strictly positive",
                         true);
    }
    res.empirical_rates.push_back(empirical_rate(res.errors[g], dims));
    res.theoretical_rates.push_back(theoretical_rate(cfg.method, cfg.alpha, cfg.gammas[g]));
  }
  for (std::size_t g = 0; g + 1 < G; ++g)
    if (res.empirical_rates[g + 1] > res.empirical_rates[g] + kMonotoneSlack)
      res.warnings.push_back("empirical rate increases from gamma=" + fmt(cfg.gammas[g]) + " (" +
                             fmt(res.empirical_rates[g]) + ") to gamma=" + fmt(cfg.gammas[g + 1]) +
                             " (" + fmt(res.empirical_rates[g + 1]) + ")");

  const long long wall_ms =
      cfg.record_wall_time ? static_cast<long long>(std::llround(res.wall_seconds * 1000.0)) : 0;
  std::string text = csv_header();
  std::size_t rows = 0;
  for (std::size_t g = 0; g < G; ++g)
    for (std::size_t d = 0; d < D; ++d) {
      text += std::to_string(kResultsSchema) + "," + method + "," + fmt(cfg.alpha) + "," +
              fmt(cfg.gammas[g]) + "," + fmt(cfg.p) + "," + std::to_string(cfg.dims[d]) + "," +
              std::to_string(cfg.samples) + "," + std::to_string(cfg.seed) + "," +
              fmt(res.errors[g][d]) + "," + fmt(res.empirical_rates[g]) + "," +
              fmt(res.theoretical_rates[g]) + "," + std::to_string(wall_ms) + "\n";
      ++rows;
    }
  for (std::size_t g = 0; g < G; ++g)
    text += "# rate gamma=" + fmt(cfg.gammas[g]) + " empirical=" + fmt(res.empirical_rates[g]) +
            " theoretical=" + fmt(res.theoretical_rates[g]) + "\n";
  for (const auto& w : res.warnings) text += "# warning " + w + "\n";
  text += "#end,rows=" + std::to_string(rows) + "\n";

  json summary;
  summary["schema"] = kResultsSchema;
  summary["method"] = method;
  summary["alpha"] = cfg.alpha;
  summary["p"] = cfg.p;
  summary["T"] = cfg.T;
  summary["dt"] = cfg.dt;
  summary["dims"] = cfg.dims;
  summary["ref_dim"] = cfg.ref_dim;
  summary["samples"] = cfg.samples;
  summary["seed"] = cfg.seed;
  summary["measurement_stride"] = cfg.measurement_stride;
  summary["csv"] = csv.filename().string();
  json rates = json::array();
  for (std::size_t g = 0; g < G; ++g)
    rates.push_back({{"gamma", cfg.gammas[g]},
                     {"empirical_rate", res.empirical_rates[g]},
                     {"theoretical_rate", res.theoretical_rates[g]},
                     {"errors", res.errors[g]}});
  summary["rates"] = rates;
  summary["warnings"] = res.warnings;
  summary["wall_ms"] = wall_ms;

  write_text_atomic(res.summary_path, summary.dump(2) + "\n");
  write_text_atomic(csv, text);
  if (opts.log) {
    for (std::size_t g = 0; g < G; ++g)
      *opts.log << "  gamma=" << cfg.gammas[g] << "  empirical rate " << res.empirical_rates[g]
                << "  theoretical " << res.theoretical_rates[g] << "\n";
    for (const auto& w : res.warnings) *opts.log << "warning: " << w << "\n";
    *opts.log << "wrote " << csv.string() << " and " << res.summary_path.string() << "\n";
  }
  return res;
}

}  // namespace fracsim
