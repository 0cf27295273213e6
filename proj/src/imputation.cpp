#include "fregmice/imputation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <set>
#include <sstream>

#include "fregmice/error.hpp"
#include "fregmice/fpca.hpp"

namespace fregmice {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double column_sd(const Eigen::VectorXd& v) {
  if (v.size() < 2) return 0.0;
  return std::sqrt((v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1));
}

TraceRecord summarize(const Column& c, const std::vector<std::size_t>& rows, int stream, int iteration) {
  TraceRecord rec;
  rec.stream = stream;
  rec.iteration = iteration;
  rec.variable = c.name;
  if (c.functional()) {
    const auto g = c.curves.cols();
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(rows.size()), g);
    for (std::size_t i = 0; i < rows.size(); ++i)
      sub.row(static_cast<Eigen::Index>(i)) = c.curves.row(static_cast<Eigen::Index>(rows[i]));
    rec.t = c.grid->points();
    rec.mean = sub.colwise().mean().transpose();
    rec.sd.resize(g);
    for (Eigen::Index k = 0; k < g; ++k) rec.sd[k] = column_sd(sub.col(k));
  } else {
    Eigen::VectorXd sub(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
      sub[static_cast<Eigen::Index>(i)] = c.scalar[static_cast<Eigen::Index>(rows[i])];
    rec.mean = Eigen::VectorXd::Constant(1, sub.mean());
    rec.sd = Eigen::VectorXd::Constant(1, column_sd(sub));
  }
  return rec;
}

void hot_deck(Column& c, const std::vector<std::size_t>& donors, const std::vector<std::size_t>& targets, Rng& rng) {
  for (auto i : targets) {
    const auto d = static_cast<Eigen::Index>(donors[rng.index(donors.size())]);
    const auto r = static_cast<Eigen::Index>(i);
    if (c.functional()) c.curves.row(r) = c.curves.row(d);
    else c.scalar[r] = c.scalar[d];
  }
}

bool degenerate_response(const Column& c) {
  if (c.functional()) {
    for (Eigen::Index i = 1; i < c.curves.rows(); ++i)
      if (c.curves.row(i) != c.curves.row(0)) return false;
    return true;
  }
  return c.scalar.size() < 2 || (c.scalar.array() == c.scalar[0]).all();
}

bool recoverable(const Error& e) {
  switch (e.category()) {
    case ErrorCategory::rank:
    case ErrorCategory::data:
    case ErrorCategory::insufficient_data:
      return true;
    default:
      return false;
  }
}

std::vector<std::size_t> rows_where(const std::vector<unsigned char>& mask, bool value) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (static_cast<bool>(mask[i]) == value) out.push_back(i);
  return out;
}

void mark_observed(MixedDataset& d) {
  for (std::size_t j = 0; j < d.cols(); ++j) std::fill(d.column(j).observed.begin(), d.column(j).observed.end(), 1);
}

}  // namespace

const std::string& model_response(const ConditionalModel& model) {
  return std::visit([](const auto& m) -> const std::string& { return m.response; }, model);
}

ConditionalModel default_model(const MixedDataset& data, const std::string& target) {
  const Column& t = data.column(target);
  if (t.functional()) {
    FrmSpec spec;
    spec.response = target;
    for (const auto& c : data.columns()) {
      if (c.name == target) continue;
      (c.functional() ? spec.ff_terms : spec.scalar_terms).push_back(c.name);
    }
    return spec;
  }
  SrmSpec spec;
  spec.response = target;
  spec.family = t.kind == ColumnKind::binary ? Family::bernoulli : Family::gaussian;
  for (const auto& c : data.columns()) {
    if (c.name == target) continue;
    (c.functional() ? spec.functional_terms : spec.scalar_terms).push_back(c.name);
  }
  return spec;
}

void ImputationSpec::validate(const MixedDataset& data) const {
  if (M < 1) throw Error(ErrorCategory::config, "M must be at least 1");
  if (V < 1) throw Error(ErrorCategory::config, "V must be at least 1");
  if (!(residual_pve > 0.0 && residual_pve <= 1.0)) throw Error(ErrorCategory::config, "residual pve must lie in (0, 1]");
  for (const auto& [name, model] : models) {
    if (model_response(model) != name)
      throw Error(ErrorCategory::config, "model for '" + name + "' has response '" + model_response(model) + "'");
    const Column& c = data.column(name);
    const bool frm = std::holds_alternative<FrmSpec>(model);
    if (frm != c.functional())
      throw Error(ErrorCategory::config, "variable '" + name + "' needs " +
                                             (c.functional() ? "an FRM" : "an SRM") + " conditional model");
    std::visit([&](const auto& m) { m.validate(data); }, model);
  }
  if (visit_order) {
    std::set<std::string> seen;
    for (const auto& name : *visit_order) {
      if (!seen.insert(name).second) throw Error(ErrorCategory::config, "variable '" + name + "' visited twice");
      data.index_of(name);
    }
    for (const auto& name : order_variables(data))
      if (!seen.count(name)) throw Error(ErrorCategory::config, "visit order omits incomplete variable '" + name + "'");
  }
}

std::vector<std::string> order_variables(const MixedDataset& data) {
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < data.cols(); ++j)
    if (data.column(j).missing_count() > 0) idx.push_back(j);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return data.column(a).missing_count() < data.column(b).missing_count();
  });
  std::vector<std::string> out;
  for (auto j : idx) out.push_back(data.column(j).name);
  return out;
}

MixedDataset initialize_fill(const MixedDataset& data, Rng& rng) {
  MixedDataset out = data;
  for (std::size_t j = 0; j < out.cols(); ++j) {
    Column& c = out.column(j);
    const auto missing = c.missing_rows();
    if (missing.empty()) continue;
    const auto donors = c.observed_rows();
    if (donors.empty()) throw Error(ErrorCategory::unimputable_column, "variable '" + c.name + "' has no observed values");
    hot_deck(c, donors, missing, rng);
  }
  mark_observed(out);
  return out;
}

VisitResult impute_variable_once(MixedDataset& current, const std::string& target, const ConditionalModel& model,
                                 const std::vector<unsigned char>& original_mask, Rng& rng, double residual_pve,
                                 const SmoothingOptions& smoothing) {
  Column& col = current.column(target);
  if (original_mask.size() != current.rows())
    throw Error(ErrorCategory::dimension, "mask of '" + target + "' has wrong length");
  const auto observed = rows_where(original_mask, true);
  const auto missing = rows_where(original_mask, false);
  if (missing.empty()) return {};
  if (observed.empty())
    throw Error(ErrorCategory::unimputable_column, "variable '" + target + "' has no observed values");

  std::vector<std::size_t> boot(observed.size());
  for (auto& b : boot) b = observed[rng.index(observed.size())];
  const MixedDataset sample = current.subset(boot);

  auto fallback = [&](std::string reason) {
    hot_deck(col, observed, missing, rng);
    return VisitResult{true, std::move(reason)};
  };
  if (degenerate_response(sample.column(target))) return fallback("bootstrap response has zero variance");

  const MixedDataset targets = current.subset(missing);
  try {
    std::visit(Overloaded{
                   [&](const SrmSpec& spec) {
                     const SrmFit fit = fit_srm(sample, spec, smoothing);
                     const Eigen::VectorXd mu = predict_srm(fit, targets);
                     const double sd = std::sqrt(std::max(fit.fit.dispersion, 0.0));
                     for (std::size_t i = 0; i < missing.size(); ++i) {
                       const auto r = static_cast<Eigen::Index>(i);
                       double v = spec.family == Family::bernoulli ? (rng.bernoulli(mu[r]) ? 1.0 : 0.0)
                                                                   : mu[r] + sd * rng.normal();
                       if (col.range) v = std::clamp(v, col.range->lo, col.range->hi);
                       col.scalar[static_cast<Eigen::Index>(missing[i])] = v;
                     }
                   },
                   [&](const FrmSpec& spec) {
                     const FrmFit fit = fit_frm(sample, spec, smoothing);
                     const Eigen::MatrixXd mu = predict_frm(fit, targets);
                     const FpcaDecomposition resid = fit_fpca(residual_curves(fit, sample), fit.grid, residual_pve);
                     for (std::size_t i = 0; i < missing.size(); ++i) {
                       const FunctionalSample draw = draw_curve(resid, rng);
                       col.curves.row(static_cast<Eigen::Index>(missing[i])) =
                           mu.row(static_cast<Eigen::Index>(i)) + draw.values.transpose();
                     }
                   },
               },
               model);
  } catch (const Error& e) {
    if (!recoverable(e)) throw;
    return fallback(std::string(category_name(e.category())) + ": " + e.what());
  }
  return {};
}

namespace {

struct StreamOutput {
  MixedDataset data;
  std::vector<TraceRecord> traces;
  std::vector<ImputationEvent> events;
};

StreamOutput run_stream(const MixedDataset& data, const ImputationSpec& spec, const std::vector<std::string>& order,
                        const std::vector<ConditionalModel>& models, int stream) {
  StreamOutput out;
  Rng init{spec.seed, static_cast<std::uint64_t>(stream), 0, 0};
  out.data = initialize_fill(data, init);
  for (int v = 1; v <= spec.V; ++v) {
    for (std::size_t k = 0; k < order.size(); ++k) {
      const std::size_t j = data.index_of(order[k]);
      const Column& original = data.column(j);
      Rng rng{spec.seed, static_cast<std::uint64_t>(stream), static_cast<std::uint64_t>(v),
              static_cast<std::uint64_t>(j + 1)};
      const VisitResult res = impute_variable_once(out.data, order[k], models[k], original.observed, rng,
                                                   spec.residual_pve, spec.smoothing);
      if (res.fallback) out.events.push_back({stream, v, order[k], res.reason});
      out.traces.push_back(summarize(out.data.column(j), original.missing_rows(), stream, v));
    }
  }
  return out;
}

}  // namespace

ImputationRun run_fregmice(const MixedDataset& data, const ImputationSpec& spec) {
  data.validate();
  spec.validate(data);
  ImputationRun run;
  run.seed = spec.seed;
  run.M = spec.M;
  run.V = spec.V;
  run.order = spec.visit_order ? *spec.visit_order : order_variables(data);
  // Complete variables in an explicit visit order have nothing to update.
  std::erase_if(run.order, [&](const std::string& name) { return data.column(name).missing_count() == 0; });
  for (const auto& name : run.order)
    if (data.column(name).observed_rows().empty())
      throw Error(ErrorCategory::unimputable_column, "variable '" + name + "' has no observed values");

  std::vector<ConditionalModel> models;
  for (const auto& name : run.order) {
    auto it = spec.models.find(name);
    models.push_back(it != spec.models.end() ? it->second : default_model(data, name));
    std::visit([&](const auto& m) { m.validate(data); }, models.back());
  }

  std::vector<StreamOutput> streams(static_cast<std::size_t>(spec.M));
  std::vector<std::exception_ptr> errors(streams.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(thread_count()) if (spec.parallel && spec.M > 1)
  for (int m = 0; m < spec.M; ++m) {
    try {
      streams[static_cast<std::size_t>(m)] = run_stream(data, spec, run.order, models, m);
    } catch (...) {
      errors[static_cast<std::size_t>(m)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  for (auto& s : streams) {
    run.datasets.push_back(std::move(s.data));
    run.traces.insert(run.traces.end(), s.traces.begin(), s.traces.end());
    run.events.insert(run.events.end(), s.events.begin(), s.events.end());
  }
  return run;
}

ImputationRun run_fregmice_grouped(const MixedDataset& data, const ImputationSpec& spec, const std::string& group) {
  const Column& g = data.column(group);
  if (g.functional() || g.missing_count() > 0)
    throw Error(ErrorCategory::config, "grouping variable '" + group + "' must be a fully observed scalar");
  std::vector<double> levels(g.scalar.data(), g.scalar.data() + g.scalar.size());
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

  ImputationRun run;
  run.seed = spec.seed;
  run.M = spec.M;
  run.V = spec.V;
  MixedDataset base = data;
  mark_observed(base);
  run.datasets.assign(static_cast<std::size_t>(spec.M), base);

  for (std::size_t l = 0; l < levels.size(); ++l) {
    std::vector<std::size_t> rows;
    for (Eigen::Index i = 0; i < g.scalar.size(); ++i)
      if (g.scalar[i] == levels[l]) rows.push_back(static_cast<std::size_t>(i));
    ImputationSpec sub_spec = spec;
    sub_spec.seed = Rng::fold({spec.seed, l});
    std::ostringstream tag;
    tag.precision(17);
    tag << "[" << group << "=" << levels[l] << "]";
    const ImputationRun sub = run_fregmice(data.subset(rows), sub_spec);
    for (const auto& name : sub.order)
      if (std::find(run.order.begin(), run.order.end(), name) == run.order.end()) run.order.push_back(name);
    for (int m = 0; m < spec.M; ++m) {
      MixedDataset& dst = run.datasets[static_cast<std::size_t>(m)];
      const MixedDataset& src = sub.datasets[static_cast<std::size_t>(m)];
      for (std::size_t j = 0; j < dst.cols(); ++j) {
        Column& dc = dst.column(j);
        const Column& sc = src.column(j);
        for (std::size_t i = 0; i < rows.size(); ++i) {
          const auto r = static_cast<Eigen::Index>(rows[i]);
          const auto s = static_cast<Eigen::Index>(i);
          if (dc.functional()) dc.curves.row(r) = sc.curves.row(s);
          else dc.scalar[r] = sc.scalar[s];
        }
      }
    }
    for (auto t : sub.traces) {
      t.variable += tag.str();
      run.traces.push_back(std::move(t));
    }
    for (auto e : sub.events) {
      e.variable += tag.str();
      run.events.push_back(std::move(e));
    }
  }
  return run;
}

StreamDiagnostics stream_diagnostics(const ImputationRun& run) {
  StreamDiagnostics out;
  // (stream, variable) -> (iteration, scalar summary of the mean trace)
  std::map<std::pair<int, std::string>, std::vector<std::pair<double, double>>> series;
  std::vector<std::string> variables;
  for (const auto& rec : run.traces) {
    if (rec.t.size() > 0) {
      for (Eigen::Index k = 0; k < rec.mean.size(); ++k)
        out.rows.push_back({rec.stream, rec.iteration, rec.variable, "pointwise-mean", rec.t[k], rec.mean[k]});
      for (Eigen::Index k = 0; k < rec.sd.size(); ++k)
        out.rows.push_back({rec.stream, rec.iteration, rec.variable, "pointwise-sd", rec.t[k], rec.sd[k]});
    } else {
      out.rows.push_back({rec.stream, rec.iteration, rec.variable, "mean", std::nullopt, rec.mean[0]});
      out.rows.push_back({rec.stream, rec.iteration, rec.variable, "sd", std::nullopt, rec.sd[0]});
    }
    if (std::find(variables.begin(), variables.end(), rec.variable) == variables.end())
      variables.push_back(rec.variable);
    series[{rec.stream, rec.variable}].push_back({static_cast<double>(rec.iteration), rec.mean.mean()});
  }

  for (const auto& var : variables) {
    std::vector<double> finals;
    std::vector<StreamSlope> slopes;
    for (int m = 0; m < run.M; ++m) {
      auto it = series.find({m, var});
      if (it == series.end()) continue;
      const auto& pts = it->second;
      double xbar = 0, ybar = 0;
      for (const auto& [x, y] : pts) {
        xbar += x;
        ybar += y;
      }
      xbar /= static_cast<double>(pts.size());
      ybar /= static_cast<double>(pts.size());
      double sxy = 0, sxx = 0;
      for (const auto& [x, y] : pts) {
        sxy += (x - xbar) * (y - ybar);
        sxx += (x - xbar) * (x - xbar);
      }
      slopes.push_back({m, var, sxx > 0 ? sxy / sxx : 0.0, false});
      finals.push_back(pts.back().second);
    }
    if (finals.size() >= 2) {
      const Eigen::Map<const Eigen::VectorXd> f(finals.data(), static_cast<Eigen::Index>(finals.size()));
      const double spread = column_sd(f);
      for (auto& s : slopes) s.flagged = std::abs(s.slope) > 2.0 * spread && std::abs(s.slope) > 0.0;
    }
    out.slopes.insert(out.slopes.end(), slopes.begin(), slopes.end());
  }
  return out;
}

}  // namespace fregmice
