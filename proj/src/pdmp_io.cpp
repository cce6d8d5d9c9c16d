#include "pdmdp/pdmp_io.hpp"

#include <cmath>
#include <cstdio>

namespace pdmdp {
namespace families {

std::function<Vec(const Vec&, double)> exponential_flow(Vec rates) {
  return [rates = std::move(rates)](const Vec& x, double t) {
    Vec out(x);
    for (std::size_t i = 0; i < out.size() && i < rates.size(); ++i) out[i] *= std::exp(rates[i] * t);
    return out;
  };
}

std::function<Vec(const Vec&, double)> linear_flow(Vec velocity) {
  return [velocity = std::move(velocity)](const Vec& x, double t) {
    Vec out(x);
    for (std::size_t i = 0; i < out.size() && i < velocity.size(); ++i) out[i] += velocity[i] * t;
    return out;
  };
}

std::function<double(const HybridState&)> exponential_walls(std::size_t coord, double rate,
                                                            double lower, double upper) {
  return [=](const HybridState& x) {
    double z = x.euclid.at(coord);
    if (rate < 0.0 && std::isfinite(lower)) return z <= lower ? 0.0 : std::log(lower / z) / rate;
    if (rate > 0.0 && std::isfinite(upper)) return z >= upper ? 0.0 : std::log(upper / z) / rate;
    return kInf;
  };
}

std::function<double(const HybridState&)> linear_walls(std::size_t coord, double velocity,
                                                       double lower, double upper) {
  return [=](const HybridState& x) {
    double z = x.euclid.at(coord);
    if (velocity < 0.0 && std::isfinite(lower)) return z <= lower ? 0.0 : (lower - z) / velocity;
    if (velocity > 0.0 && std::isfinite(upper)) return z >= upper ? 0.0 : (upper - z) / velocity;
    return kInf;
  };
}

void set_weibull(ModeSpec& spec, double alpha, double beta) {
  if (alpha == 0.0) {
    spec.constant_intensity = beta;
    return;
  }
  const double k = alpha + 1.0;
  spec.constant_intensity.reset();
  spec.intensity = [=](const HybridState& x) { return beta * std::pow(x.elapsed.value(), alpha); };
  spec.hazard = [=](const HybridState& x, double t) {
    double u = x.elapsed.value();
    return beta * (std::pow(u + t, k) - std::pow(u, k)) / k;
  };
  spec.inverse_hazard = [=](const HybridState& x, double e) {
    if (beta == 0.0) return kInf;
    double u = x.elapsed.value();
    return std::pow(k * e / beta + std::pow(u, k), 1.0 / k) - u;
  };
}

HybridState retarget(const HybridState& pre, const Target& target) {
  HybridState post = pre;
  post.mode = target.mode;
  if (target.euclid) post.euclid = *target.euclid;
  return post;
}

void set_switch_kernel(ModeSpec& spec, Target on_random, std::optional<Target> on_boundary) {
  Target boundary = on_boundary.value_or(on_random);
  spec.kernel = [on_random, boundary](const HybridState& pre, JumpKind kind, Rng&) {
    return retarget(pre, kind == JumpKind::kBoundary ? boundary : on_random);
  };
  spec.kernel_outcomes = [on_random, boundary](const HybridState& pre, JumpKind kind) {
    return std::vector<std::pair<double, HybridState>>{
        {1.0, retarget(pre, kind == JumpKind::kBoundary ? boundary : on_random)}};
  };
}

namespace {
double branch_rate(const ModeSpec& r, const HybridState& x) {
  if (r.constant_intensity) return *r.constant_intensity;
  if (r.intensity) return r.intensity(x);
  return 0.0;
}
double branch_hazard(const ModeSpec& r, const HybridState& x, double t) {
  if (r.constant_intensity) return *r.constant_intensity * t;
  if (r.hazard) return r.hazard(x, t);
  return 0.0;
}
}  // namespace

void set_competing(ModeSpec& spec, std::vector<Branch> branches, std::optional<Target> on_boundary) {
  spec.constant_intensity.reset();
  spec.inverse_hazard = nullptr;
  bool all_constant = true;
  double total_constant = 0.0;
  for (const Branch& b : branches) {
    if (b.rate.constant_intensity)
      total_constant += *b.rate.constant_intensity;
    else if (b.rate.intensity || b.rate.hazard)
      all_constant = false;
  }
  if (all_constant) {
    spec.constant_intensity = total_constant;
    spec.intensity = nullptr;
    spec.hazard = nullptr;
  } else {
    spec.intensity = [branches](const HybridState& x) {
      double s = 0.0;
      for (const Branch& b : branches) s += branch_rate(b.rate, x);
      return s;
    };
    spec.hazard = [branches](const HybridState& x, double t) {
      double s = 0.0;
      for (const Branch& b : branches) s += branch_hazard(b.rate, x, t);
      return s;
    };
  }
  auto weights = [branches](const HybridState& pre) {
    std::vector<double> w;
    double total = 0.0;
    for (const Branch& b : branches) {
      w.push_back(branch_rate(b.rate, pre));
      total += w.back();
    }
    for (double& v : w) v = total > 0.0 ? v / total : 1.0 / static_cast<double>(w.size());
    return w;
  };
  std::optional<Target> boundary = on_boundary;
  spec.kernel = [branches, weights, boundary](const HybridState& pre, JumpKind kind, Rng& rng) {
    if (kind == JumpKind::kBoundary && boundary) return retarget(pre, *boundary);
    std::vector<double> w = weights(pre);
    double u = uniform01(rng), acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      acc += w[i];
      if (u < acc || i + 1 == w.size()) return retarget(pre, branches[i].target);
    }
    return retarget(pre, branches.back().target);
  };
  spec.kernel_outcomes = [branches, weights, boundary](const HybridState& pre, JumpKind kind) {
    std::vector<std::pair<double, HybridState>> out;
    if (kind == JumpKind::kBoundary && boundary) {
      out.push_back({1.0, retarget(pre, *boundary)});
      return out;
    }
    std::vector<double> w = weights(pre);
    for (std::size_t i = 0; i < w.size(); ++i)
      if (w[i] > 0.0) out.push_back({w[i], retarget(pre, branches[i].target)});
    return out;
  };
}

}  // namespace families

namespace {

using nlohmann::json;

double number_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? j.at(key).get<double>() : fallback;
}

Vec vec_of(const json& j) {
  if (j.is_number()) return {j.get<double>()};
  return j.get<Vec>();
}

families::Target target_of(const json& j) {
  families::Target t;
  t.mode = j.at("to").get<int>();
  if (j.contains("set")) t.euclid = vec_of(j.at("set"));
  return t;
}

void apply_intensity(ModeSpec& spec, const json& j) {
  std::string type = j.value("type", "zero");
  if (type == "zero") {
    spec.constant_intensity = 0.0;
  } else if (type == "constant") {
    spec.constant_intensity = j.at("rate").get<double>();
  } else if (type == "weibull") {
    families::set_weibull(spec, number_or(j, "alpha", 0.0), j.at("beta").get<double>());
  } else {
    throw Error(ErrorCode::kValidation, "unknown intensity type '" + type + "'");
  }
}

}  // namespace

PdmpModel pdmp_from_json(const json& doc) {
  PdmpModel model;
  model.time_augmented = doc.value("time_augmented", false);
  if (doc.contains("intensity_bound")) model.intensity_bound = doc.at("intensity_bound").get<double>();
  model.max_jumps = doc.value("max_jumps", model.max_jumps);
  if (!doc.contains("modes") || !doc.at("modes").is_array())
    throw Error(ErrorCode::kValidation, "model needs a 'modes' array");
  for (const json& m : doc.at("modes")) {
    ModeSpec spec;
    int id = m.at("id").get<int>();
    const json flow = m.value("flow", json{{"type", "constant"}});
    std::string ftype = flow.value("type", "constant");
    std::size_t coord = 0;
    double rate = 0.0;
    if (ftype == "exponential") {
      Vec rates = vec_of(flow.at("rate"));
      rate = rates.at(0);
      spec.flow = families::exponential_flow(rates);
    } else if (ftype == "linear") {
      Vec v = vec_of(flow.at("velocity"));
      rate = v.at(0);
      spec.flow = families::linear_flow(v);
    } else if (ftype == "constant") {
      spec.flow = [](const Vec& x, double) { return x; };
    } else {
      throw Error(ErrorCode::kValidation, "unknown flow type '" + ftype + "'");
    }
    if (m.contains("boundary")) {
      const json& b = m.at("boundary");
      coord = b.value("coord", std::size_t{0});
      if (coord != 0) throw Error(ErrorCode::kValidation, "boundary walls support coordinate 0");
      double lo = number_or(b, "lower", -kInf), hi = number_or(b, "upper", kInf);
      if (ftype == "exponential") spec.boundary_time = families::exponential_walls(0, rate, lo, hi);
      if (ftype == "linear") spec.boundary_time = families::linear_walls(0, rate, lo, hi);
    }
    if (m.contains("region")) {
      const json& r = m.at("region");
      double lo = number_or(r, "lower", -kInf), hi = number_or(r, "upper", kInf);
      bool lo_open = r.value("lower_open", false), hi_open = r.value("upper_open", false);
      spec.region = [=](const Vec& x) {
        double z = x.at(0);
        bool ok_lo = lo_open ? z > lo : z >= lo;
        bool ok_hi = hi_open ? z < hi : z <= hi;
        return ok_lo && ok_hi;
      };
    }
    const json kernel = m.value("kernel", json::object());
    std::optional<families::Target> on_boundary;
    if (kernel.contains("on_boundary")) on_boundary = target_of(kernel.at("on_boundary"));
    std::string ktype = kernel.value("type", "switch");
    if (m.contains("intensity") && m.at("intensity").value("type", "") == "competing") {
      std::vector<families::Branch> branches;
      for (const json& br : m.at("intensity").at("branches")) {
        families::Branch b;
        apply_intensity(b.rate, br.at("intensity"));
        b.target = target_of(br);
        branches.push_back(std::move(b));
      }
      families::set_competing(spec, std::move(branches), on_boundary);
    } else {
      apply_intensity(spec, m.value("intensity", json{{"type", "zero"}}));
      if (ktype != "switch") throw Error(ErrorCode::kValidation, "unknown kernel type '" + ktype + "'");
      if (kernel.contains("to")) {
        families::set_switch_kernel(spec, target_of(kernel), on_boundary);
      } else if (on_boundary) {
        families::set_switch_kernel(spec, *on_boundary, on_boundary);
      }
    }
    if (!model.modes.emplace(id, std::move(spec)).second)
      throw Error(ErrorCode::kValidation, "duplicate mode id " + std::to_string(id));
  }
  for (auto& [id, spec] : model.modes) {
    bool jumps = !spec.zero_intensity() || spec.boundary_time;
    if (jumps && !spec.kernel)
      throw Error(ErrorCode::kValidation, "mode " + std::to_string(id) + " can jump but has no kernel");
  }
  return model;
}

HybridState hybrid_state_from_json(const json& doc) {
  HybridState x;
  x.mode = doc.at("mode").get<int>();
  x.euclid = vec_of(doc.at("euclid"));
  if (doc.contains("elapsed") && !doc.at("elapsed").is_null()) x.elapsed = doc.at("elapsed").get<double>();
  return x;
}

json to_json(const HybridState& x) {
  json j{{"mode", x.mode}, {"euclid", x.euclid}};
  j["elapsed"] = x.elapsed ? json(*x.elapsed) : json(nullptr);
  return j;
}

namespace {
void csv_row(std::ostream& out, double t, const HybridState& x, std::size_t width, const char* flag) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", t);
  out << buf << ',' << x.mode;
  for (std::size_t i = 0; i < width; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", i < x.euclid.size() ? x.euclid[i] : 0.0);
    out << ',' << buf;
  }
  if (x.elapsed) {
    std::snprintf(buf, sizeof buf, "%.17g", *x.elapsed);
    out << ',' << buf;
  } else {
    out << ',';
  }
  out << ',' << flag << '\n';
}
}  // namespace

void write_trajectory_csv(std::ostream& out, const PdmpModel& model, const Trajectory& traj) {
  std::size_t width = traj.initial.euclid.size();
  out << "t,mode";
  for (std::size_t i = 0; i < width; ++i) out << ",euclid_" << i;
  out << ",elapsed,event_flag\n";
  csv_row(out, 0.0, traj.initial, width, "start");
  for (const Jump& j : traj.jumps) {
    csv_row(out, j.time, j.pre, width, "pre_jump");
    csv_row(out, j.time, j.post, width, to_string(j.kind));
  }
  double last_event = traj.jumps.empty() ? 0.0 : traj.jumps.back().time;
  if (traj.end_time > last_event)
    csv_row(out, traj.end_time, state_at(model, traj, traj.end_time), width, "end");
}

}  // namespace pdmdp
