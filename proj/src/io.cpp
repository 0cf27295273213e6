#include "fregmice/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fregmice/error.hpp"

namespace fregmice {

std::string format_double(double v) {
  if (std::isnan(v)) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCategory::io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCategory::io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorCategory::io, "write failed for '" + path.string() + "'");
}

Json read_json(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCategory::parse, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

namespace {

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& context) {
  if (!j.is_object()) throw Error(ErrorCategory::parse, context + " must be a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items())
    if (!ok.count(item.key())) throw Error(ErrorCategory::config, "unknown key '" + item.key() + "' in " + context);
}

template <class T>
T get(const Json& j, const char* key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCategory::parse, std::string("field '") + key + "': " + e.what());
  }
}

template <class T>
T require(const Json& j, const char* key, const std::string& context) {
  if (!j.contains(key)) throw Error(ErrorCategory::config, context + " lacks required field '" + key + "'");
  return get<T>(j, key, T{});
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool is_missing(const std::string& cell) { return cell.empty() || cell == "NA"; }

double parse_number(const std::string& cell, std::size_t line, const std::string& column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCategory::parse, "line " + std::to_string(line) + ", column '" + column + "': not a number '" +
                                          cell + "'");
  }
}

Eigen::VectorXd to_vector(const Json& j, const std::string& context) {
  if (!j.is_array()) throw Error(ErrorCategory::parse, context + " must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorCategory::parse, context + " must hold numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd to_matrix(const Json& j, const std::string& context) {
  if (!j.is_array()) throw Error(ErrorCategory::parse, context + " must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m(rows, rows == 0 ? 0 : static_cast<Eigen::Index>(j[0].size()));
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::VectorXd row = to_vector(j[static_cast<std::size_t>(r)], context);
    if (row.size() != m.cols()) throw Error(ErrorCategory::parse, context + " rows differ in length");
    m.row(r) = row.transpose();
  }
  return m;
}

Json vector_json(const Eigen::VectorXd& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Json matrix_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_json(m.row(r).transpose()));
  return out;
}

struct FunctionalHeader {
  std::string name;
  std::vector<std::size_t> columns;  // csv column per grid index
};

}  // namespace

MixedDataset parse_dataset(const std::string& csv, const Json& sidecar) {
  check_keys(sidecar, {"grids", "binary", "ranges"}, "grid sidecar");
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCategory::parse, "data file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_line(line);

  // Column layout: scalar names in order; functional blocks by first appearance.
  struct Slot {
    bool functional;
    std::string name;
  };
  std::vector<Slot> slots;
  std::map<std::string, std::size_t> scalar_col;
  std::map<std::string, std::map<std::size_t, std::size_t>> func_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& h = header[c];
    const auto pos = h.rfind("__t");
    if (pos != std::string::npos && pos + 3 < h.size() &&
        h.find_first_not_of("0123456789", pos + 3) == std::string::npos) {
      const std::string name = h.substr(0, pos);
      const std::size_t g = std::stoul(h.substr(pos + 3));
      if (!func_cols.count(name)) slots.push_back({true, name});
      if (!func_cols[name].emplace(g, c).second) throw Error(ErrorCategory::parse, "duplicate column '" + h + "'");
    } else {
      if (h.empty()) throw Error(ErrorCategory::parse, "empty column name in header");
      if (!scalar_col.emplace(h, c).second) throw Error(ErrorCategory::parse, "duplicate column '" + h + "'");
      slots.push_back({false, h});
    }
  }

  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (cells.size() != header.size())
      throw Error(ErrorCategory::parse, "line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                                            " fields, expected " + std::to_string(header.size()));
    rows.push_back(std::move(cells));
  }
  const std::size_t n = rows.size();
  if (n == 0) throw Error(ErrorCategory::parse, "data file has no rows");

  const Json grids = sidecar.value("grids", Json::object());
  std::set<std::string> binary;
  for (const auto& b : sidecar.value("binary", Json::array())) binary.insert(b.get<std::string>());
  const Json ranges = sidecar.value("ranges", Json::object());
  for (const auto& item : grids.items())
    if (!func_cols.count(item.key()))
      throw Error(ErrorCategory::config, "sidecar grid for '" + item.key() + "' has no data columns");

  MixedDataset data(n);
  for (const auto& slot : slots) {
    if (!slot.functional) {
      const std::size_t c = scalar_col.at(slot.name);
      Eigen::VectorXd v(static_cast<Eigen::Index>(n));
      std::vector<unsigned char> obs(n);
      bool zero_one = true;
      for (std::size_t i = 0; i < n; ++i) {
        const auto& cell = rows[i][c];
        obs[i] = !is_missing(cell);
        v[static_cast<Eigen::Index>(i)] = obs[i] ? parse_number(cell, i + 2, slot.name) : std::nan("");
        if (obs[i] && v[static_cast<Eigen::Index>(i)] != 0.0 && v[static_cast<Eigen::Index>(i)] != 1.0) zero_one = false;
      }
      const ColumnKind kind = (binary.count(slot.name) || (zero_one && sidecar.contains("binary") == false))
                                  ? ColumnKind::binary
                                  : ColumnKind::continuous;
      std::optional<Range> range;
      if (ranges.contains(slot.name)) {
        const Eigen::VectorXd r = to_vector(ranges.at(slot.name), "range of '" + slot.name + "'");
        if (r.size() != 2 || !(r[0] <= r[1])) throw Error(ErrorCategory::config, "range of '" + slot.name + "' must be [lo, hi]");
        range = Range{r[0], r[1]};
      }
      data.add_scalar(slot.name, v, kind, obs, range);
      continue;
    }
    if (!grids.contains(slot.name)) throw Error(ErrorCategory::config, "sidecar has no grid for '" + slot.name + "'");
    auto grid = std::make_shared<const Grid>(to_vector(grids.at(slot.name), "grid of '" + slot.name + "'"));
    const auto& cols = func_cols.at(slot.name);
    if (cols.size() != grid->size() || cols.rbegin()->first != grid->size() - 1)
      throw Error(ErrorCategory::dimension, "functional block '" + slot.name + "' does not match its grid");
    Eigen::MatrixXd curves(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(grid->size()));
    std::vector<unsigned char> obs(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t present = 0;
      for (const auto& [g, c] : cols) present += is_missing(rows[i][c]) ? 0 : 1;
      if (present != 0 && present != cols.size())
        throw Error(ErrorCategory::data, "row " + std::to_string(i + 1) + " has a partially missing curve for '" +
                                             slot.name + "'");
      obs[i] = present != 0;
      for (const auto& [g, c] : cols)
        curves(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g)) =
            obs[i] ? parse_number(rows[i][c], i + 2, slot.name) : std::nan("");
    }
    data.add_functional(slot.name, grid, curves, obs);
  }
  data.validate();
  return data;
}

MixedDataset read_dataset(const fs::path& csv, const fs::path& sidecar) {
  const std::string text = read_text(csv);
  return parse_dataset(text, read_json(sidecar));
}

Json sidecar_json(const MixedDataset& data) {
  Json grids = Json::object(), binary = Json::array(), ranges = Json::object();
  for (const auto& c : data.columns()) {
    if (c.functional()) grids[c.name] = vector_json(c.grid->points());
    if (c.kind == ColumnKind::binary) binary.push_back(c.name);
    if (c.range) ranges[c.name] = {c.range->lo, c.range->hi};
  }
  Json j = {{"grids", grids}, {"binary", binary}};
  if (!ranges.empty()) j["ranges"] = ranges;
  return j;
}

std::string format_dataset(const MixedDataset& data) {
  std::string out;
  bool first = true;
  auto sep = [&] {
    if (!first) out += ',';
    first = false;
  };
  for (const auto& c : data.columns()) {
    if (!c.functional()) {
      sep();
      out += c.name;
      continue;
    }
    for (std::size_t g = 0; g < c.grid->size(); ++g) {
      sep();
      out += c.name + "__t" + std::to_string(g);
    }
  }
  out += '\n';
  for (std::size_t i = 0; i < data.rows(); ++i) {
    first = true;
    const auto r = static_cast<Eigen::Index>(i);
    for (const auto& c : data.columns()) {
      if (!c.functional()) {
        sep();
        out += c.observed[i] ? format_double(c.scalar[r]) : "NA";
        continue;
      }
      for (Eigen::Index g = 0; g < c.curves.cols(); ++g) {
        sep();
        out += c.observed[i] ? format_double(c.curves(r, g)) : "NA";
      }
    }
    out += '\n';
  }
  return out;
}

void write_dataset(const MixedDataset& data, const fs::path& csv) { write_text(csv, format_dataset(data)); }

BasisConfig parse_basis(const Json& j) {
  check_keys(j, {"L", "kind", "penalty_order"}, "basis config");
  BasisConfig b;
  b.L = get<int>(j, "L", b.L);
  b.kind = get<std::string>(j, "kind", b.kind);
  b.penalty_order = get<int>(j, "penalty_order", b.penalty_order);
  if (b.L < 4) throw Error(ErrorCategory::config, "basis L must be at least 4");
  if (b.kind != "bspline-cubic") throw Error(ErrorCategory::config, "unsupported basis kind '" + b.kind + "'");
  if (b.penalty_order != 2) throw Error(ErrorCategory::config, "penalty_order must be 2");
  return b;
}

Json basis_config_json(const BasisConfig& b) {
  return {{"L", b.L}, {"kind", b.kind}, {"penalty_order", b.penalty_order}};
}

namespace {

std::map<std::string, BasisConfig> parse_term_basis(const Json& j) {
  std::map<std::string, BasisConfig> out;
  if (!j.contains("term_basis")) return out;
  for (const auto& item : j.at("term_basis").items()) out.emplace(item.key(), parse_basis(item.value()));
  return out;
}

Json term_basis_json(const std::map<std::string, BasisConfig>& m) {
  Json out = Json::object();
  for (const auto& [k, v] : m) out[k] = basis_config_json(v);
  return out;
}

}  // namespace

FrmSpec parse_frm_spec(const Json& j) {
  check_keys(j, {"type", "response", "scalar_terms", "ff_terms", "intercept", "basis", "ff_basis", "term_basis"},
             "FRM spec");
  FrmSpec s;
  s.response = require<std::string>(j, "response", "FRM spec");
  s.scalar_terms = get<std::vector<std::string>>(j, "scalar_terms", {});
  s.ff_terms = get<std::vector<std::string>>(j, "ff_terms", {});
  s.intercept = get<bool>(j, "intercept", true);
  if (j.contains("basis")) s.basis = parse_basis(j.at("basis"));
  if (j.contains("ff_basis")) s.ff_basis = parse_basis(j.at("ff_basis"));
  s.term_basis = parse_term_basis(j);
  return s;
}

SrmSpec parse_srm_spec(const Json& j) {
  check_keys(j, {"type", "response", "scalar_terms", "functional_terms", "family", "intercept", "basis", "pve",
                 "term_basis"},
             "SRM spec");
  SrmSpec s;
  s.response = require<std::string>(j, "response", "SRM spec");
  s.scalar_terms = get<std::vector<std::string>>(j, "scalar_terms", {});
  s.functional_terms = get<std::vector<std::string>>(j, "functional_terms", {});
  s.family = parse_family(get<std::string>(j, "family", "gaussian"));
  s.intercept = get<bool>(j, "intercept", true);
  if (j.contains("basis")) s.basis = parse_basis(j.at("basis"));
  s.pve = get<double>(j, "pve", s.pve);
  s.term_basis = parse_term_basis(j);
  return s;
}

ConditionalModel parse_model(const Json& j, const MixedDataset* data) {
  if (!j.is_object()) throw Error(ErrorCategory::parse, "model spec must be a JSON object");
  std::string type = get<std::string>(j, "type", "");
  if (type.empty()) {
    if (j.contains("ff_terms")) type = "frm";
    else if (j.contains("functional_terms") || j.contains("family") || j.contains("pve")) type = "srm";
    else if (data && j.contains("response"))
      type = data->column(j.at("response").get<std::string>()).functional() ? "frm" : "srm";
    else throw Error(ErrorCategory::config, "model spec needs a \"type\" of frm or srm");
  }
  if (type == "frm") return parse_frm_spec(j);
  if (type == "srm") return parse_srm_spec(j);
  throw Error(ErrorCategory::config, "unknown model type '" + type + "'");
}

Json model_json(const ConditionalModel& model) {
  if (const auto* f = std::get_if<FrmSpec>(&model)) {
    Json j = {{"type", "frm"},
              {"response", f->response},
              {"scalar_terms", f->scalar_terms},
              {"ff_terms", f->ff_terms},
              {"intercept", f->intercept},
              {"basis", basis_config_json(f->basis)},
              {"ff_basis", basis_config_json(f->ff_basis)}};
    if (!f->term_basis.empty()) j["term_basis"] = term_basis_json(f->term_basis);
    return j;
  }
  const auto& s = std::get<SrmSpec>(model);
  Json j = {{"type", "srm"},
            {"response", s.response},
            {"scalar_terms", s.scalar_terms},
            {"functional_terms", s.functional_terms},
            {"family", family_name(s.family)},
            {"intercept", s.intercept},
            {"basis", basis_config_json(s.basis)},
            {"pve", s.pve}};
  if (!s.term_basis.empty()) j["term_basis"] = term_basis_json(s.term_basis);
  return j;
}

ImputationSpec parse_imputation_spec(const Json& j, const MixedDataset& data) {
  check_keys(j, {"M", "V", "seed", "models", "visit_order", "residual_pve"}, "imputation spec");
  ImputationSpec s;
  s.M = get<int>(j, "M", s.M);
  s.V = get<int>(j, "V", s.V);
  s.seed = get<std::uint64_t>(j, "seed", s.seed);
  s.residual_pve = get<double>(j, "residual_pve", s.residual_pve);
  if (j.contains("visit_order")) s.visit_order = j.at("visit_order").get<std::vector<std::string>>();
  if (j.contains("models")) {
    for (const auto& item : j.at("models").items()) {
      Json m = item.value();
      if (!m.contains("response")) m["response"] = item.key();
      s.models.emplace(item.key(), parse_model(m, &data));
    }
  }
  return s;
}

ScenarioConfig parse_scenario(const Json& j) {
  check_keys(j, {"study", "parameter_set", "scenario", "mechanism", "n", "missing", "seed", "replications", "methods",
                 "M", "V"},
             "scenario config");
  ScenarioConfig c;
  c.study = parse_study(get<std::string>(j, "study", "frm-sim"));
  c.parameter_set = get<int>(j, "parameter_set", c.parameter_set);
  const std::string scen = get<std::string>(j, "scenario", "a");
  if (scen.size() != 1) throw Error(ErrorCategory::config, "scenario must be \"a\" or \"b\"");
  c.scenario = scen[0];
  c.mechanism = get<std::string>(j, "mechanism", c.mechanism);
  c.n = get<int>(j, "n", c.n);
  c.missing = get<double>(j, "missing", c.missing);
  c.seed = get<std::uint64_t>(j, "seed", c.seed);
  c.replications = get<int>(j, "replications", c.replications);
  if (j.contains("methods")) {
    c.methods.clear();
    for (const auto& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
  }
  c.M = get<int>(j, "M", c.M);
  c.V = get<int>(j, "V", c.V);
  c.validate();
  return c;
}

Json scenario_json(const ScenarioConfig& c) {
  Json methods = Json::array();
  for (auto m : c.methods) methods.push_back(method_name(m));
  return {{"study", study_name(c.study)},
          {"parameter_set", c.parameter_set},
          {"scenario", std::string(1, c.scenario)},
          {"mechanism", c.mechanism},
          {"n", c.n},
          {"missing", c.missing},
          {"seed", c.seed},
          {"replications", c.replications},
          {"methods", methods},
          {"M", c.M},
          {"V", c.V}};
}

namespace {

Json basis_json(const BSplineBasis& b) { return {{"lower", b.lower()}, {"upper", b.upper()}, {"L", b.size()}}; }

BSplineBasis parse_bspline(const Json& j) {
  check_keys(j, {"lower", "upper", "L"}, "basis");
  return BSplineBasis(require<double>(j, "lower", "basis"), require<double>(j, "upper", "basis"),
                      require<int>(j, "L", "basis"));
}

}  // namespace

Json term_json(const TermEstimate& t) {
  Json j = {{"label", t.label}, {"shape", shape_name(t.shape)}};
  if (t.basis) j["basis"] = basis_json(*t.basis);
  if (t.s_basis) j["s_basis"] = basis_json(*t.s_basis);
  j["grid"] = vector_json(t.grid);
  j["coefficients"] = vector_json(t.coefficients);
  j["covariance"] = matrix_json(t.covariance);
  return j;
}

TermEstimate parse_term(const Json& j) {
  check_keys(j, {"label", "shape", "basis", "s_basis", "grid", "coefficients", "covariance"}, "term");
  TermEstimate t;
  t.label = require<std::string>(j, "label", "term");
  t.shape = parse_shape(require<std::string>(j, "shape", "term"));
  if (j.contains("basis")) t.basis = parse_bspline(j.at("basis"));
  if (j.contains("s_basis")) t.s_basis = parse_bspline(j.at("s_basis"));
  t.grid = j.contains("grid") ? to_vector(j.at("grid"), "grid") : Eigen::VectorXd();
  t.coefficients = to_vector(j.at("coefficients"), "coefficients");
  t.covariance = to_matrix(j.at("covariance"), "covariance");
  if (t.covariance.rows() != t.coefficients.size() || t.covariance.cols() != t.coefficients.size())
    throw Error(ErrorCategory::dimension, "covariance of term '" + t.label + "' does not match its coefficients");
  if (t.shape == TermShape::curve && !t.basis) throw Error(ErrorCategory::parse, "curve term '" + t.label + "' lacks a basis");
  return t;
}

namespace {

FitRecord common_record(const PenalizedFit& pf, std::string model, std::string response) {
  FitRecord r;
  r.model = std::move(model);
  r.response = std::move(response);
  r.family = family_name(pf.family);
  r.dispersion = pf.dispersion;
  r.edf = pf.edf;
  r.n = static_cast<long>(pf.n);
  for (std::size_t k = 0; k < pf.blocks.size(); ++k) r.lambdas.emplace_back(pf.blocks[k].label, pf.lambdas[k]);
  return r;
}

}  // namespace

FitRecord fit_record(const FrmFit& fit) {
  FitRecord r = common_record(fit.fit, "frm", fit.spec.response);
  r.terms = fit.estimates();
  return r;
}

FitRecord fit_record(const SrmFit& fit) {
  FitRecord r = common_record(fit.fit, "srm", fit.spec.response);
  r.terms = fit.estimates();
  return r;
}

Json fit_json(const FitRecord& fit) {
  Json lambdas = Json::object();
  for (const auto& [k, v] : fit.lambdas) lambdas[k] = v;
  Json terms = Json::array();
  for (const auto& t : fit.terms) terms.push_back(term_json(t));
  return {{"model", fit.model}, {"response", fit.response}, {"family", fit.family}, {"dispersion", fit.dispersion},
          {"edf", fit.edf},     {"n", fit.n},               {"lambdas", lambdas},   {"terms", terms}};
}

FitRecord parse_fit(const Json& j) {
  check_keys(j, {"model", "response", "family", "dispersion", "edf", "n", "lambdas", "terms"}, "fit");
  FitRecord r;
  r.model = require<std::string>(j, "model", "fit");
  r.response = get<std::string>(j, "response", "");
  r.family = get<std::string>(j, "family", "gaussian");
  r.dispersion = get<double>(j, "dispersion", 0.0);
  r.edf = get<double>(j, "edf", 0.0);
  r.n = get<long>(j, "n", 0);
  if (j.contains("lambdas"))
    for (const auto& item : j.at("lambdas").items()) r.lambdas.emplace_back(item.key(), item.value().get<double>());
  if (!j.contains("terms") || !j.at("terms").is_array()) throw Error(ErrorCategory::parse, "fit lacks a terms array");
  for (const auto& t : j.at("terms")) r.terms.push_back(parse_term(t));
  return r;
}

Json pooled_json(const std::vector<PooledCoefficient>& pooled, const BandOptions& options) {
  Json terms = Json::array();
  for (const auto& p : pooled) {
    Json t = term_json(p.term);
    t.erase("covariance");
    t["within"] = matrix_json(p.within);
    t["between"] = matrix_json(p.between);
    if (p.term.shape != TermShape::surface) {
      const PooledBand b = pooled_band(p, options);
      t["band"] = {{"t", vector_json(b.t)},
                   {"estimate", vector_json(b.estimate)},
                   {"se", vector_json(b.se)},
                   {"lo", vector_json(b.lower)},
                   {"hi", vector_json(b.upper)}};
    }
    terms.push_back(std::move(t));
  }
  return {{"M", pooled.empty() ? 0 : pooled.front().M},
          {"level", options.level},
          {"quantile", options.student_t ? "student-t" : "normal"},
          {"terms", terms}};
}

std::string format_bands(const std::vector<PooledCoefficient>& pooled, const BandOptions& options) {
  std::string out = "term,t,estimate,se,lo,hi\n";
  for (const auto& p : pooled) {
    if (p.term.shape == TermShape::surface) continue;
    const PooledBand b = pooled_band(p, options);
    for (Eigen::Index k = 0; k < b.estimate.size(); ++k) {
      out += p.term.label + ',' + (p.term.shape == TermShape::scalar ? std::string("NA") : format_double(b.t[k])) + ',' +
             format_double(b.estimate[k]) + ',' + format_double(b.se[k]) + ',' + format_double(b.lower[k]) + ',' +
             format_double(b.upper[k]) + '\n';
    }
  }
  return out;
}

}  // namespace fregmice
