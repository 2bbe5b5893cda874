#include "parkmc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "parkmc/kmc.hpp"
#include "parkmc/oracle.hpp"

namespace parkmc {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing text");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' expects a number, got '" + value + "'");
  }
}

long parse_long(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    long v = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument("trailing text");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' expects an integer, got '" + value + "'");
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_doubles(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += fmt(values[i]);
  }
  return out;
}

std::string cell_label(SchemeKind s, DecompositionKind d, double dt) {
  return "scheme=" + to_string(s) + ",decomposition=" + to_string(d) + ",dt=" + fmt(dt);
}

}  // namespace

std::string to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Sample: return "sample";
    case RunMode::Oracle: return "oracle";
    case RunMode::Both: return "both";
  }
  return "unknown";
}

RunMode run_mode_from_string(const std::string& name) {
  if (name == "sample") return RunMode::Sample;
  if (name == "oracle") return RunMode::Oracle;
  if (name == "both") return RunMode::Both;
  throw ConfigError("unknown mode '" + name + "'");
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig c;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "model") {
        if (value == "adsorption") c.model = ModelKind::AdsorptionDesorption;
        else if (value == "diffusion") c.model = ModelKind::Diffusion;
        else throw ConfigError("unknown model '" + value + "'");
      } else if (key == "c1") c.adsorption.c1 = parse_double(key, value);
      else if (key == "c2") c.adsorption.c2 = parse_double(key, value);
      else if (key == "beta") c.adsorption.beta = parse_double(key, value);
      else if (key == "J0") c.adsorption.J0 = parse_double(key, value);
      else if (key == "h") c.adsorption.h = parse_double(key, value);
      else if (key == "hop_rate") c.diffusion.hop_rate = parse_double(key, value);
      else if (key == "particles") c.particles = static_cast<int>(parse_long(key, value));
      else if (key == "N1") c.N1 = static_cast<int>(parse_long(key, value));
      else if (key == "N2") c.N2 = static_cast<int>(parse_long(key, value));
      else if (key == "interaction_range") c.interaction_range = static_cast<int>(parse_long(key, value));
      else if (key == "decompositions") {
        c.decompositions.clear();
        for (const auto& v : split_list(value)) c.decompositions.push_back(decomposition_kind_from_string(v));
      } else if (key == "decomposition_width") c.decomposition_width = static_cast<int>(parse_long(key, value));
      else if (key == "schemes") {
        c.schemes.clear();
        for (const auto& v : split_list(value)) c.schemes.push_back(scheme_kind_from_string(v));
      } else if (key == "swap_groups") c.swap_groups = value == "true" || value == "1";
      else if (key == "dt") {
        c.dt.clear();
        for (const auto& v : split_list(value)) c.dt.push_back(parse_double(key, v));
      } else if (key == "n_steps") c.n_steps = parse_long(key, value);
      else if (key == "burn_in") c.burn_in = parse_long(key, value);
      else if (key == "batches") c.batches = static_cast<int>(parse_long(key, value));
      else if (key == "seed") c.seed = std::stoull(value);
      else if (key == "initial") c.initial = value;
      else if (key == "mode") c.mode = run_mode_from_string(value);
      else if (key == "output") c.output = value;
      else if (key == "threads") c.threads = static_cast<int>(parse_long(key, value));
      else throw ConfigError("unknown key '" + key + "'");
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "model = " << to_string(c.model) << '\n';
  if (c.model == ModelKind::AdsorptionDesorption) {
    o << "c1 = " << fmt(c.adsorption.c1) << "\nc2 = " << fmt(c.adsorption.c2) << "\nbeta = "
      << fmt(c.adsorption.beta) << "\nJ0 = " << fmt(c.adsorption.J0) << "\nh = " << fmt(c.adsorption.h) << '\n';
  } else {
    o << "hop_rate = " << fmt(c.diffusion.hop_rate) << "\nparticles = " << c.effective_particles() << '\n';
  }
  o << "N1 = " << c.N1 << "\nN2 = " << c.N2 << "\ninteraction_range = " << c.interaction_range << '\n';
  o << "decompositions = ";
  for (std::size_t i = 0; i < c.decompositions.size(); ++i) o << (i ? ", " : "") << to_string(c.decompositions[i]);
  o << "\ndecomposition_width = " << c.decomposition_width << "\nschemes = ";
  for (std::size_t i = 0; i < c.schemes.size(); ++i) o << (i ? ", " : "") << to_string(c.schemes[i]);
  o << "\nswap_groups = " << (c.swap_groups ? "true" : "false") << "\ndt = " << join_doubles(c.dt) << '\n';
  o << "n_steps = " << c.n_steps << "\nburn_in = " << c.effective_burn_in() << "\nbatches = " << c.batches
    << "\nseed = " << c.seed << "\ninitial = " << c.initial << "\nmode = " << to_string(c.mode)
    << "\noutput = " << c.output << '\n';
  return o.str();
}

void validate(const ExperimentConfig& c) {
  if (c.dt.empty()) throw ConfigError("dt list is empty");
  for (double dt : c.dt) {
    if (!(dt > 0.0)) throw ConfigError("dt values must be positive");
  }
  if (c.schemes.empty()) throw ConfigError("schemes list is empty");
  if (c.decompositions.empty()) throw ConfigError("decompositions list is empty");
  if (c.N1 < 1 || c.N2 < 1) throw ConfigError("lattice dimensions must be positive");
  if (c.interaction_range < 1) throw ConfigError("interaction_range must be positive");
  if (c.mode != RunMode::Oracle) {
    if (c.n_steps <= c.effective_burn_in() || c.effective_burn_in() < 0) {
      throw ConfigError("need n_steps > burn_in >= 0");
    }
  }
  if (c.batches < 1) throw ConfigError("batches must be positive");
  if (c.threads < 1) throw ConfigError("threads must be positive");
  if (c.initial != "full" && c.initial != "empty" && c.initial != "random") {
    throw ConfigError("initial must be full, empty or random");
  }
  if (c.model == ModelKind::Diffusion && (c.effective_particles() < 0 || c.effective_particles() > c.N1 * c.N2)) {
    throw ConfigError("particle count out of range");
  }
  if (c.mode != RunMode::Sample) {
    const int n = c.N1 * c.N2;
    double states = 0.0;
    if (c.model == ModelKind::AdsorptionDesorption) {
      states = std::ldexp(1.0, n);
    } else {
      states = 1.0;
      for (int i = 0; i < c.effective_particles(); ++i) states = states * (n - i) / (i + 1);
    }
    if (states > 4096) throw ConfigError("lattice is too large for the oracle (" + fmt(states) + " states)");
  }
  // Surface decomposition errors before any work starts.
  Lattice lattice(c.N1, c.N2, c.interaction_range);
  for (auto kind : c.decompositions) Decomposition::build(lattice, kind, c.decomposition_width);
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RateModel make_model(const ExperimentConfig& c) {
  Lattice lattice(c.N1, c.N2, c.interaction_range);
  return c.model == ModelKind::AdsorptionDesorption ? RateModel::adsorption_desorption(lattice, c.adsorption)
                                                    : RateModel::diffusion(lattice, c.diffusion);
}

SpinConfiguration make_initial(const ExperimentConfig& c) {
  const auto n = static_cast<std::size_t>(c.N1 * c.N2);
  if (c.model == ModelKind::Diffusion || c.initial == "random") {
    // Random placement; for diffusion the particle count is fixed.
    std::vector<std::uint8_t> spins(n, 0);
    std::mt19937_64 rng(derive_stream_seed(c.seed, 0xC0FFEEULL, 0));
    if (c.model == ModelKind::Diffusion) {
      std::fill_n(spins.begin(), c.effective_particles(), 1);
      std::shuffle(spins.begin(), spins.end(), rng);
    } else {
      for (auto& s : spins) s = static_cast<std::uint8_t>(rng() & 1u);
    }
    return SpinConfiguration(std::move(spins));
  }
  return SpinConfiguration(n, c.initial == "empty" ? 0 : 1);
}

std::string csv_header() {
  return "scheme,decomposition,width,N1,N2,dt,p,A_hat,A_se,D_hat,D_se,epr_leading,epr_se,epr_oracle,rer_oracle,"
         "disc_oracle,n_samples,seed";
}

std::string format_row(const ResultRow& r) {
  std::ostringstream o;
  o << to_string(r.scheme) << ',' << to_string(r.decomposition) << ',' << r.width << ',' << r.N1 << ',' << r.N2
    << ',' << fmt(r.dt) << ',' << r.p << ',';
  if (r.sampled) {
    const auto& s = *r.sampled;
    o << fmt(s.A.value) << ',' << fmt(s.A.se) << ',' << fmt(s.D.value) << ',' << fmt(s.D.se) << ','
      << fmt(s.epr_leading.value) << ',' << fmt(s.epr_leading.se) << ',';
  } else {
    o << ",,,,,,";
  }
  auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string(); };
  o << opt(r.epr_oracle) << ',' << opt(r.rer_oracle) << ',' << opt(r.disc_oracle) << ',';
  if (r.sampled) o << r.n_samples;
  o << ',' << r.seed;
  return o.str();
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  validate(config);
  const RateModel model = make_model(config);
  const SpinConfiguration initial = make_initial(config);
  std::vector<Decomposition> decomps;
  for (auto kind : config.decompositions) {
    decomps.push_back(Decomposition::build(model.lattice(), kind, config.decomposition_width));
  }

  struct Cell {
    std::size_t scheme, decomposition, dt;
  };
  std::vector<Cell> cells;
  for (std::size_t s = 0; s < config.schemes.size(); ++s)
    for (std::size_t d = 0; d < decomps.size(); ++d)
      for (std::size_t t = 0; t < config.dt.size(); ++t) cells.push_back({s, d, t});

  std::vector<ResultRow> rows(cells.size());
  std::vector<std::optional<CellFailure>> failures(cells.size());
  const bool want_sample = config.mode != RunMode::Oracle;
  const bool want_oracle = config.mode != RunMode::Sample;
  const int particles = config.model == ModelKind::Diffusion ? config.effective_particles() : -1;

  auto run_cell = [&](std::size_t index) {
    const Cell& cell = cells[index];
    const SchemeKind kind = config.schemes[cell.scheme];
    const Decomposition& dec = decomps[cell.decomposition];
    const SchemeSpec scheme{kind, config.dt[cell.dt], config.swap_groups};
    ResultRow& row = rows[index];
    row.scheme = kind;
    row.decomposition = dec.kind();
    row.width = dec.width();
    row.N1 = config.N1;
    row.N2 = config.N2;
    row.dt = scheme.dt;
    row.p = scheme.order();
    row.seed = config.seed;
    try {
      const double divisor = per_site_divisor(config.model, config.N1, config.N2);
      if (want_sample) {
        ChainOptions opts;
        opts.n_steps = config.n_steps;
        opts.burn_in = config.effective_burn_in();
        opts.seed = derive_stream_seed(config.seed, cell.scheme * 1024 + cell.decomposition, cell.dt);
        EprAccumulator acc(model, dec, scheme);
        sample_chain_visit(scheme, model, dec, initial, opts,
                           [&](long, const SpinConfiguration& s) { acc.add(s); });
        row.sampled = normalize_per_site(acc.report(opts.burn_in, config.batches));
        row.n_samples = row.sampled->n_samples;
      }
      if (want_oracle) {
        DenseChain chain = DenseChain::build(model, dec, particles);
        Matrix Po = transition_exact(chain, scheme.dt);
        Matrix Pb = transition_scheme(chain, scheme);
        Vector mu = stationary(Pb);
        row.epr_oracle = epr_exact(Pb, mu, scheme.dt) / divisor;
        row.rer_oracle = rer_exact(Pb, Po, mu, scheme.dt) / divisor;
        row.disc_oracle = discrepancy_exact(Pb, Po, mu, scheme.dt) / divisor;
      }
    } catch (const Error& e) {
      failures[index].emplace(e.kind(), cell_label(kind, dec.kind(), scheme.dt), e.what());
    } catch (const std::exception& e) {
      failures[index].emplace("RuntimeError", cell_label(kind, dec.kind(), scheme.dt), e.what());
    }
  };

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) run_cell(i);
  };
  const int n_threads = std::max(1, std::min<int>(config.threads, static_cast<int>(cells.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  ExperimentResult result;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (failures[i]) {
      result.failure = failures[i];
      break;
    }
    result.rows.push_back(rows[i]);
  }

  if (want_oracle && !result.failure && config.dt.size() >= 4) {
    std::vector<double> grid = config.dt;
    std::sort(grid.begin(), grid.end());
    for (auto kind : config.schemes) {
      if (kind == SchemeKind::Exact) continue;
      for (const auto& dec : decomps) {
        FitRecord rec{kind, dec.kind(), false, 0.0};
        try {
          DenseChain chain = DenseChain::build(model, dec, particles);
          OrderFit fit = epr_order_fit(chain, kind, grid);
          rec.fitted = fit.fitted;
          rec.slope = fit.slope;
        } catch (const std::exception&) {
          rec.fitted = false;  // grid not geometric, or the chain has no finite EPR
        }
        result.fits.push_back(rec);
      }
    }
  }
  return result;
}

RunOutput run_and_write(const ExperimentConfig& config, const std::string& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out_dir);
  RunOutput out;
  out.csv_path = (std::filesystem::path(out_dir) / "results.csv").string();
  out.manifest_path = (std::filesystem::path(out_dir) / "manifest.json").string();
  out.result = run_experiment(config);

  {
    std::ofstream csv(out.csv_path, std::ios::binary);
    csv << csv_header() << '\n';
    for (const auto& row : out.result.rows) csv << format_row(row) << '\n';
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string canonical = serialize_config(config);
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(canonical)));
  nlohmann::json manifest;
  manifest["version"] = PARKMC_VERSION;
  manifest["config_hash"] = hash;
  manifest["config"] = canonical;
  manifest["seed"] = config.seed;
  manifest["mode"] = to_string(config.mode);
  manifest["threads"] = config.threads;
  manifest["rows"] = out.result.rows.size();
  manifest["wall_time_seconds"] = wall;
  manifest["columns_normalized_per_site"] = true;
  manifest["per_site_divisor"] = per_site_divisor(config.model, config.N1, config.N2);
  nlohmann::json fits = nlohmann::json::array();
  for (const auto& f : out.result.fits) {
    nlohmann::json j;
    j["scheme"] = to_string(f.scheme);
    j["decomposition"] = to_string(f.decomposition);
    j["fitted"] = f.fitted;
    if (f.fitted) j["slope"] = f.slope;
    fits.push_back(j);
  }
  manifest["order_fits"] = fits;
  if (out.result.failure) {
    manifest["error"] = {{"kind", out.result.failure->kind()},
                         {"cell", out.result.failure->cell()},
                         {"message", out.result.failure->what()}};
  }
  {
    std::ofstream m(out.manifest_path);
    m << manifest.dump(2) << '\n';
  }
  if (out.result.failure) throw *out.result.failure;
  return out;
}

}  // namespace parkmc
