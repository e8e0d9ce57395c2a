#include "cladp/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace cladp {
namespace {

namespace pt = boost::property_tree;

[[noreturn]] void Fail(const std::string& section, const std::string& key,
                       const std::string& message) {
  throw ConfigError("[" + section + "]." + key + ": " + message);
}

const std::map<std::string, std::set<std::string>>& Schema() {
  static const std::map<std::string, std::set<std::string>> schema = {
      {"plant", {"model", "A", "B", "K0", "theta"}},
      {"cost", {"Q", "R"}},
      {"basis", {"degrees"}},
      {"identifier",
       {"k_x", "gamma_theta", "k_theta", "stack_capacity", "record_interval",
        "exact_derivatives", "freeze_stack_after_rank", "rank_threshold"}},
      {"adp",
       {"eta_c1", "eta_c2", "eta_a1", "eta_a2", "nu", "beta", "gamma_bar",
        "gamma_under", "gamma0", "num_points", "box", "jitter", "Wc0", "Wa0",
        "rank_threshold"}},
      {"analysis",
       {"W_bar", "eps_bar", "eps_prime_bar", "Z_bar", "zeta1", "zeta2",
        "grid_level", "y_under", "c_under"}},
      {"sim",
       {"dt", "t_final", "x0", "xhat0", "thetahat0", "rank_check_interval",
        "log_interval", "seed", "learning"}},
  };
  return schema;
}

// Access to one section with key-path-aware diagnostics.
class Section {
 public:
  Section(std::string name, const pt::ptree* tree)
      : name_(std::move(name)), tree_(tree) {}

  std::optional<std::string> Raw(const std::string& key) const {
    if (!tree_) return std::nullopt;
    auto it = tree_->find(key);
    if (it == tree_->not_found()) return std::nullopt;
    std::string v = it->second.data();
    if (auto hash = v.find('#'); hash != std::string::npos) v.erase(hash);
    while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back())))
      v.pop_back();
    if (v.empty()) Fail(name_, key, "empty value");
    return v;
  }

  std::string RequireRaw(const std::string& key) const {
    auto v = Raw(key);
    if (!v) Fail(name_, key, "missing required key");
    return *v;
  }

  double ParseDouble(const std::string& key, const std::string& text) const {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &pos);
    } catch (const std::exception&) {
      Fail(name_, key, "expected a number, got '" + text + "'");
    }
    if (pos != text.size()) Fail(name_, key, "expected a number, got '" + text + "'");
    if (!std::isfinite(v)) Fail(name_, key, "must be finite");
    return v;
  }

  std::optional<double> Number(const std::string& key) const {
    auto raw = Raw(key);
    if (!raw) return std::nullopt;
    return ParseDouble(key, *raw);
  }

  double Number(const std::string& key, double fallback) const {
    return Number(key).value_or(fallback);
  }

  std::optional<long long> Integer(const std::string& key) const {
    auto v = Number(key);
    if (!v) return std::nullopt;
    if (std::floor(*v) != *v) Fail(name_, key, "must be an integer");
    return static_cast<long long>(*v);
  }

  bool Bool(const std::string& key, bool fallback) const {
    auto raw = Raw(key);
    if (!raw) return fallback;
    if (*raw == "true" || *raw == "1") return true;
    if (*raw == "false" || *raw == "0") return false;
    Fail(name_, key, "expected true or false");
  }

  std::optional<MatrixXd> Matrix(const std::string& key) const {
    auto raw = Raw(key);
    if (!raw) return std::nullopt;
    std::vector<std::vector<double>> rows;
    std::stringstream rows_in(*raw);
    std::string row_text;
    while (std::getline(rows_in, row_text, ';')) {
      for (char& c : row_text)
        if (c == ',') c = ' ';
      std::stringstream row_in(row_text);
      std::vector<double> row;
      std::string token;
      while (row_in >> token) row.push_back(ParseDouble(key, token));
      if (row.empty()) Fail(name_, key, "empty matrix row");
      rows.push_back(std::move(row));
    }
    const std::size_t cols = rows.front().size();
    MatrixXd m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != cols) Fail(name_, key, "ragged matrix rows");
      for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
    }
    return m;
  }

  std::optional<VectorXd> Vector(const std::string& key) const {
    auto m = Matrix(key);
    if (!m) return std::nullopt;
    if (m->rows() != 1) Fail(name_, key, "expected a vector (no ';')");
    return VectorXd(m->row(0).transpose());
  }

  const std::string& name() const { return name_; }

 private:
  std::string name_;
  const pt::ptree* tree_;
};

VectorXd Broadcast(const Section& sec, const std::string& key, VectorXd v,
                   int size) {
  if (v.size() == 1 && size > 1) return VectorXd::Constant(size, v(0));
  if (v.size() != size)
    Fail(sec.name(), key, "expected " + std::to_string(size) + " entries");
  return v;
}

MatrixXd SquareOrScalar(const Section& sec, const std::string& key,
                        const MatrixXd& m, int size) {
  if (m.size() == 1) return m(0, 0) * MatrixXd::Identity(size, size);
  if (m.rows() != size || m.cols() != size)
    Fail(sec.name(), key, "expected a " + std::to_string(size) + "x" +
                              std::to_string(size) + " matrix");
  return m;
}

void RequirePositive(const Section& sec, const std::string& key, double v) {
  if (!(v > 0.0)) Fail(sec.name(), key, "must be positive");
}

void RequireNonnegative(const Section& sec, const std::string& key, double v) {
  if (!(v >= 0.0)) Fail(sec.name(), key, "must be nonnegative");
}

int PlantParameterCount(const ExperimentConfig::Plant& plant, int n) {
  return plant.model == "polynomial" ? 5 : n * n;
}

}  // namespace

ExperimentConfig ParseConfigText(const std::string& text) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [name, child] : tree) {
    auto it = Schema().find(name);
    if (child.empty() && !child.data().empty())
      throw ConfigError(name + ": key outside of any section");
    if (it == Schema().end()) throw ConfigError("[" + name + "]: unknown section");
    for (const auto& [key, value] : child)
      if (!it->second.count(key)) Fail(name, key, "unknown key");
  }
  auto section = [&tree](const std::string& name) {
    auto it = tree.find(name);
    return Section(name, it == tree.not_found() ? nullptr : &it->second);
  };

  ExperimentConfig cfg;

  // [plant]
  const Section plant = section("plant");
  cfg.plant.model = plant.RequireRaw("model");
  int n = 0, m = 0;
  if (cfg.plant.model == "linear") {
    auto A = plant.Matrix("A");
    if (!A) Fail("plant", "A", "missing required key");
    auto B = plant.Matrix("B");
    if (!B) Fail("plant", "B", "missing required key");
    cfg.plant.A = *A;
    cfg.plant.B = *B;
    n = static_cast<int>(cfg.plant.A.rows());
    if (cfg.plant.A.cols() != n) Fail("plant", "A", "must be square");
    if (cfg.plant.B.rows() != n)
      Fail("plant", "B", "must have as many rows as A");
    m = static_cast<int>(cfg.plant.B.cols());
    cfg.plant.K0 = plant.Matrix("K0");
    if (cfg.plant.K0 && (cfg.plant.K0->rows() != m || cfg.plant.K0->cols() != n))
      Fail("plant", "K0", "must be m x n");
    if (plant.Raw("theta")) Fail("plant", "theta", "only valid for the polynomial model");
  } else if (cfg.plant.model == "polynomial") {
    n = 2;
    m = 1;
    cfg.plant.theta = plant.Vector("theta");
    if (cfg.plant.theta && cfg.plant.theta->size() != 5)
      Fail("plant", "theta", "expected 5 entries");
    for (const char* key : {"A", "B", "K0"})
      if (plant.Raw(key)) Fail("plant", key, "only valid for the linear model");
  } else {
    Fail("plant", "model", "unknown model '" + cfg.plant.model +
                               "' (expected linear or polynomial)");
  }
  const int p = PlantParameterCount(cfg.plant, n);

  // [cost]
  const Section cost = section("cost");
  auto Q = cost.Matrix("Q");
  if (!Q) Fail("cost", "Q", "missing required key");
  cfg.cost.Q = SquareOrScalar(cost, "Q", *Q, n);
  if (!IsPositiveDefinite(cfg.cost.Q))
    Fail("cost", "Q", "must be symmetric positive definite");
  auto R = cost.Matrix("R");
  if (!R) Fail("cost", "R", "missing required key");
  cfg.cost.R = SquareOrScalar(cost, "R", *R, m);
  if (!IsPositiveDefinite(cfg.cost.R))
    Fail("cost", "R", "must be symmetric positive definite");

  // [basis]
  const Section basis = section("basis");
  if (auto d = basis.Vector("degrees")) {
    cfg.basis.degrees.clear();
    for (Eigen::Index i = 0; i < d->size(); ++i) {
      const double v = (*d)(i);
      if (std::floor(v) != v || v < 2)
        Fail("basis", "degrees", "degrees must be integers >= 2");
      cfg.basis.degrees.push_back(static_cast<int>(v));
    }
  }
  const int L = MakePolynomialBasis(n, cfg.basis.degrees).size();

  // [identifier]
  const Section id = section("identifier");
  cfg.identifier.k_x = Broadcast(id, "k_x", id.Vector("k_x").value_or(VectorXd::Ones(1)), n);
  if (!(cfg.identifier.k_x.array() > 0).all()) Fail("identifier", "k_x", "must be positive");
  cfg.identifier.Gamma_theta = SquareOrScalar(
      id, "gamma_theta", id.Matrix("gamma_theta").value_or(MatrixXd::Ones(1, 1)), p);
  if (!IsPositiveDefinite(cfg.identifier.Gamma_theta))
    Fail("identifier", "gamma_theta", "must be symmetric positive definite");
  cfg.identifier.k_theta = id.Number("k_theta", 1.0);
  RequireNonnegative(id, "k_theta", cfg.identifier.k_theta);
  if (auto c = id.Integer("stack_capacity")) {
    if (*c < 1) Fail("identifier", "stack_capacity", "must be at least 1");
    cfg.identifier.stack_capacity = static_cast<int>(*c);
  }
  cfg.identifier.record_interval = static_cast<int>(id.Integer("record_interval").value_or(10));
  if (cfg.identifier.record_interval < 1)
    Fail("identifier", "record_interval", "must be at least 1");
  cfg.identifier.exact_derivatives = id.Bool("exact_derivatives", false);
  cfg.identifier.freeze_stack_after_rank = id.Bool("freeze_stack_after_rank", false);
  cfg.identifier.rank_threshold = id.Number("rank_threshold", 1e-6);
  RequirePositive(id, "rank_threshold", cfg.identifier.rank_threshold);

  // [adp]
  const Section adp = section("adp");
  AdpGains& g = cfg.adp.gains;
  g.eta_c1 = adp.Number("eta_c1", g.eta_c1);
  g.eta_c2 = adp.Number("eta_c2", g.eta_c2);
  g.eta_a1 = adp.Number("eta_a1", g.eta_a1);
  g.eta_a2 = adp.Number("eta_a2", g.eta_a2);
  g.nu = adp.Number("nu", g.nu);
  g.beta = adp.Number("beta", g.beta);
  g.Gamma_bar = adp.Number("gamma_bar", g.Gamma_bar);
  g.Gamma_under = adp.Number("gamma_under", g.Gamma_under);
  for (auto [key, value] : {std::pair{"eta_c1", g.eta_c1}, std::pair{"eta_c2", g.eta_c2},
                            std::pair{"eta_a1", g.eta_a1}, std::pair{"nu", g.nu},
                            std::pair{"beta", g.beta}, std::pair{"gamma_bar", g.Gamma_bar},
                            std::pair{"gamma_under", g.Gamma_under}})
    RequirePositive(adp, key, value);
  RequireNonnegative(adp, "eta_a2", g.eta_a2);
  if (g.Gamma_under > g.Gamma_bar)
    Fail("adp", "gamma_under", "must not exceed gamma_bar");
  cfg.adp.gamma0 = adp.Number("gamma0", 1.0);
  RequirePositive(adp, "gamma0", cfg.adp.gamma0);
  if (cfg.adp.gamma0 > g.Gamma_bar) Fail("adp", "gamma0", "must not exceed gamma_bar");
  if (auto c = adp.Integer("num_points")) {
    if (*c < 1) Fail("adp", "num_points", "must be at least 1");
    cfg.adp.num_points = static_cast<int>(*c);
  }
  cfg.adp.box = Broadcast(adp, "box", adp.Vector("box").value_or(VectorXd::Ones(1)), n);
  if (!(cfg.adp.box.array() > 0).all()) Fail("adp", "box", "must be positive");
  cfg.adp.jitter = adp.Number("jitter", 0.0);
  RequireNonnegative(adp, "jitter", cfg.adp.jitter);
  if (auto w = adp.Vector("Wc0")) cfg.adp.Wc0 = Broadcast(adp, "Wc0", *w, L);
  if (auto w = adp.Vector("Wa0")) cfg.adp.Wa0 = Broadcast(adp, "Wa0", *w, L);
  cfg.adp.rank_threshold = adp.Number("rank_threshold", 1e-6);
  RequirePositive(adp, "rank_threshold", cfg.adp.rank_threshold);

  // [analysis]
  const Section an = section("analysis");
  cfg.analysis.W_bar = an.Number("W_bar");
  if (cfg.analysis.W_bar) RequireNonnegative(an, "W_bar", *cfg.analysis.W_bar);
  cfg.analysis.eps_bar = an.Number("eps_bar", 0.0);
  RequireNonnegative(an, "eps_bar", cfg.analysis.eps_bar);
  cfg.analysis.eps_prime_bar = an.Number("eps_prime_bar", 0.0);
  RequireNonnegative(an, "eps_prime_bar", cfg.analysis.eps_prime_bar);
  cfg.analysis.Z_bar = an.Number("Z_bar");
  if (cfg.analysis.Z_bar) RequirePositive(an, "Z_bar", *cfg.analysis.Z_bar);
  cfg.analysis.zeta1 = an.Number("zeta1", 1.0);
  RequirePositive(an, "zeta1", cfg.analysis.zeta1);
  cfg.analysis.zeta2 = an.Number("zeta2", 1.0);
  RequirePositive(an, "zeta2", cfg.analysis.zeta2);
  cfg.analysis.grid_level = static_cast<int>(an.Integer("grid_level").value_or(6));
  if (cfg.analysis.grid_level < 0 || cfg.analysis.grid_level > 12)
    Fail("analysis", "grid_level", "must be in [0, 12]");
  cfg.analysis.y_under = an.Number("y_under");
  cfg.analysis.c_under = an.Number("c_under");

  // [sim]
  const Section sim = section("sim");
  cfg.sim.dt = sim.Number("dt", 0.005);
  RequirePositive(sim, "dt", cfg.sim.dt);
  auto t_final = sim.Number("t_final");
  if (!t_final) Fail("sim", "t_final", "missing required key");
  cfg.sim.t_final = *t_final;
  RequireNonnegative(sim, "t_final", cfg.sim.t_final);
  auto x0 = sim.Vector("x0");
  if (!x0) Fail("sim", "x0", "missing required key");
  cfg.sim.x0 = Broadcast(sim, "x0", *x0, n);
  if (auto v = sim.Vector("xhat0")) cfg.sim.xhat0 = Broadcast(sim, "xhat0", *v, n);
  if (auto v = sim.Vector("thetahat0"))
    cfg.sim.thetahat0 = Broadcast(sim, "thetahat0", *v, p);
  for (auto [key, field] : {std::pair{"rank_check_interval", &cfg.sim.rank_check_interval},
                            std::pair{"log_interval", &cfg.sim.log_interval}}) {
    if (auto v = sim.Integer(key)) {
      if (*v < 1) Fail("sim", key, "must be at least 1");
      *field = static_cast<int>(*v);
    }
  }
  if (auto v = sim.Integer("seed")) {
    if (*v < 0) Fail("sim", "seed", "must be nonnegative");
    cfg.sim.seed = static_cast<std::uint64_t>(*v);
  }
  cfg.sim.learning = sim.Bool("learning", true);
  return cfg;
}

ExperimentConfig ParseConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseConfigText(buffer.str());
}

PlantModel BuildPlant(const ExperimentConfig& cfg) {
  if (cfg.plant.model == "linear")
    return MakeLinearPlant(cfg.plant.A, cfg.plant.B, cfg.plant.K0);
  return MakePolynomialPlant(cfg.plant.theta);
}

double ResolveZBar(const ExperimentConfig& cfg) {
  if (cfg.analysis.Z_bar) return *cfg.analysis.Z_bar;
  const double r = 2.0 * cfg.sim.x0.norm();
  return r > 0.0 ? r : 1.0;
}

Experiment BuildExperiment(const ExperimentConfig& cfg) {
  PlantModel model = BuildPlant(cfg);
  CostSpec cost(cfg.cost.Q, cfg.cost.R);
  ValueBasis basis = MakePolynomialBasis(model.n(), cfg.basis.degrees);
  const int L = basis.size();
  const int p = model.p();

  std::optional<VectorXd> W_star;
  if (model.linearization() && cfg.basis.degrees == std::vector<int>{2}) {
    try {
      W_star = MakeLqrOracle(model, cost, basis).W_star;
    } catch (const std::runtime_error&) {
      // No oracle for this plant; error columns are simply omitted.
    }
  }

  const double Z_bar = ResolveZBar(cfg);
  const int N = cfg.adp.num_points.value_or(3 * L);
  std::vector<VectorXd> points =
      MakeSamplePoints(cfg.adp.box, N, cfg.adp.jitter, cfg.sim.seed);
  for (const auto& x : points)
    if (x.norm() > Z_bar * (1.0 + 1e-12))
      Fail("adp", "box", "sample points leave the ball of radius Z_bar = " +
                             std::to_string(Z_bar));
  const Problem problem{model, cost, basis};
  SamplePointSet samples(problem, std::move(points), Z_bar);

  SimConfig sim;
  sim.dt = cfg.sim.dt;
  sim.t_final = cfg.sim.t_final;
  sim.x0 = cfg.sim.x0;
  sim.xhat0 = cfg.sim.xhat0.value_or(cfg.sim.x0);
  sim.thetahat0 = cfg.sim.thetahat0.value_or(VectorXd::Zero(p));
  sim.Wc0 = cfg.adp.Wc0.value_or(VectorXd::Constant(L, 0.5));
  sim.Wa0 = cfg.adp.Wa0.value_or(VectorXd::Constant(L, 0.5));
  sim.Gamma0 = cfg.adp.gamma0 * MatrixXd::Identity(L, L);
  sim.record_interval = cfg.identifier.record_interval;
  sim.rank_check_interval = cfg.sim.rank_check_interval;
  sim.log_interval = cfg.sim.log_interval;
  sim.seed = cfg.sim.seed;
  sim.exact_derivatives = cfg.identifier.exact_derivatives;
  sim.freeze_stack_after_rank = cfg.identifier.freeze_stack_after_rank;
  sim.learning = cfg.sim.learning;
  sim.stack_rank_threshold = cfg.identifier.rank_threshold;
  sim.sample_rank_threshold = cfg.adp.rank_threshold;

  IdentifierGains id_gains(cfg.identifier.k_x, cfg.identifier.Gamma_theta,
                           cfg.identifier.k_theta);
  const int capacity = cfg.identifier.stack_capacity.value_or(2 * p);
  return Experiment{std::move(model), std::move(cost),    std::move(basis),
                    std::move(id_gains), capacity,       cfg.adp.gains,
                    std::move(samples),  std::move(sim), std::move(W_star)};
}

GainInputs BuildGainInputs(const ExperimentConfig& cfg, const Experiment& exp,
                           double y_under, double c_under) {
  GainInputs in;
  if (cfg.analysis.W_bar) {
    in.W_bar = *cfg.analysis.W_bar;
  } else if (exp.W_star) {
    in.W_bar = exp.W_star->norm();
  } else {
    Fail("analysis", "W_bar", "required when no ideal-weight oracle exists");
  }
  in.eps_bar = cfg.analysis.eps_bar;
  in.eps_prime_bar = cfg.analysis.eps_prime_bar;
  in.Z_bar = ResolveZBar(cfg);
  const LipschitzEstimate lip =
      EstimateLipschitz(exp.model, in.Z_bar, cfg.analysis.grid_level);
  in.L_f = lip.L_f;
  in.L_Y = lip.L_Y;
  in.zeta1 = cfg.analysis.zeta1;
  in.zeta2 = cfg.analysis.zeta2;
  in.Gamma_under = exp.adp_gains.Gamma_under;
  in.nu = exp.adp_gains.nu;
  in.eta_c1 = exp.adp_gains.eta_c1;
  in.eta_c2 = exp.adp_gains.eta_c2;
  in.eta_a1 = exp.adp_gains.eta_a1;
  in.eta_a2 = exp.adp_gains.eta_a2;
  in.k_theta = exp.identifier_gains.k_theta;
  in.q_under = exp.cost.q_under();
  in.y_under = cfg.analysis.y_under.value_or(y_under);
  in.c_under = cfg.analysis.c_under.value_or(c_under);
  return in;
}

GainReport EvaluateGains(const ExperimentConfig& cfg, const Experiment& exp,
                         double y_under, double c_under) {
  const GainInputs in = BuildGainInputs(cfg, exp, y_under, c_under);
  const SupEstimates sups =
      EstimateSups(exp.problem(), in.Z_bar, cfg.analysis.grid_level);
  return CheckGainConditions(in, ComputeVarthetas(in, sups, exp.problem(), exp.samples));
}

}  // namespace cladp
