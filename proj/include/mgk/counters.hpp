#ifndef MGK_COUNTERS_HPP
#define MGK_COUNTERS_HPP

#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>

namespace mgk {

/// Abstract storage/arithmetic cost parameters of the XMV hotspot.
struct CostModel {
  double E = 0.0;  // bytes per edge label
  double F = 4.0;  // bytes per float
  double X = 3.0;  // flops per fused edge-kernel contribution
  double t = 8.0;  // tile edge length
  double r = 8.0;  // register chunk length

  void check() const {
    if (!(E >= 0.0) || !(F > 0.0) || !(X > 0.0) || !(t > 0.0) || !(r > 0.0))
      throw std::invalid_argument("cost model requires E >= 0 and F, X, t, r > 0");
  }
};

enum class Primitive { naive, shared_tiling, register_blocking, tiling_blocking };

inline std::string to_string(Primitive p) {
  switch (p) {
    case Primitive::naive: return "naive";
    case Primitive::shared_tiling: return "shared-tiling";
    case Primitive::register_blocking: return "register-blocking";
    case Primitive::tiling_blocking: return "tiling-blocking";
  }
  return "?";
}

inline Primitive parse_primitive(const std::string& s) {
  if (s == "naive") return Primitive::naive;
  if (s == "shared-tiling") return Primitive::shared_tiling;
  if (s == "register-blocking") return Primitive::register_blocking;
  if (s == "tiling-blocking") return Primitive::tiling_blocking;
  throw std::invalid_argument("unknown primitive '" + s + "'");
}

/// Operation and traffic totals of one XMV. Tier 1 is graph storage, tier 2
/// the expanded working set. Byte counts except flops.
struct CounterReport {
  double flops = 0.0;
  double t1_load = 0.0;
  double t1_store = 0.0;
  double t2_load = 0.0;
  double t2_store = 0.0;
  double ai1 = 0.0;
  double ai2 = 0.0;
  // Tile loads of the outer (first-graph) loop, amortized across the inner
  // loop and left out of t1_load, matching the leading-order totals.
  double t1_outer_load = 0.0;
};

/**
 * Closed-form per-iteration XMV totals for each primitive.
 *
 * Loads and stores carry the leading-order terms; the arithmetic intensities
 * are the asymptotic ratios (stores and lower-order loads dropped), so for the
 * naive primitive ai1 = 2/F regardless of n and m.
 */
inline CounterReport predict_costs(const CostModel& c, double n, double m, Primitive prim) {
  c.check();
  const double E = c.E, F = c.F, X = c.X, t = c.t, r = c.r;
  const double nm = n * m;
  const double n2m2 = nm * nm;
  CounterReport rep;
  rep.t1_store = nm * F;
  switch (prim) {
    case Primitive::naive:
      rep.flops = 2.0 * n2m2;
      rep.t1_load = n2m2 * F;
      rep.ai1 = 2.0 / F;
      break;
    case Primitive::shared_tiling:
      rep.flops = n2m2 * X;
      rep.t1_load = n2m2 * (t / r * E + (r + t) / r * F) / (t * t);
      rep.t2_load = n2m2 * ((r + 1) / r * E + (2 * r + 1) / r * F);
      rep.t2_store = n2m2 * (t / r * E + (r + t) / r * F) / (t * t);
      rep.ai1 = t * t * X / (t / r * E + (1 + t / r) * F);
      rep.ai2 = X / ((1 + 1 / r) * E + (2 + 1 / r) * F);
      rep.t1_outer_load = n * n * m * (E + F) / t;
      break;
    case Primitive::register_blocking:
      rep.flops = n2m2 * X;
      rep.t1_load = n2m2 * (t / r * E + (t + r) / r * F) / (t * t);
      rep.t2_load = n2m2 * F;
      rep.t2_store = n2m2 * F / (t * t);
      rep.ai1 = t * t * X / (t / r * E + (1 + t / r) * F);
      rep.ai2 = X / ((1 + 1 / (t * t)) * F);
      rep.t1_outer_load = n * n * m * (E + F) / t;
      break;
    case Primitive::tiling_blocking:
      rep.flops = n2m2 * X;
      rep.t1_load = n2m2 * (E + 2 * F) / (t * t);
      rep.t2_load = n2m2 * ((r + t) / (r * t) * E + (r + t) / (r * t) * F);
      rep.t2_store = n2m2 * (E + F) / (t * t);
      rep.ai1 = t * t * X / (E + 2 * F);
      rep.ai2 = X / ((1 / r + 1 / t) * E + (1 / r + 1 / t) * F);
      rep.t1_outer_load = n * n * m * (E + F) / t;
      break;
  }
  return rep;
}

inline void print_report(std::ostream& os, const CounterReport& r) {
  os << "flops       " << r.flops << '\n'
     << "t1_load     " << r.t1_load << '\n'
     << "t1_store    " << r.t1_store << '\n'
     << "t2_load     " << r.t2_load << '\n'
     << "t2_store    " << r.t2_store << '\n'
     << "AI1         " << r.ai1 << '\n'
     << "AI2         " << r.ai2 << '\n';
}

inline const char* counter_csv_header() {
  return "primitive,n,m,E,F,X,flops,t1_load,t1_store,t2_load,t2_store,AI1,AI2";
}

inline void print_csv_row(std::ostream& os, const std::string& label, double n, double m,
                          const CostModel& c, const CounterReport& r) {
  os << label << ',' << n << ',' << m << ',' << c.E << ',' << c.F << ',' << c.X << ',' << r.flops
     << ',' << r.t1_load << ',' << r.t1_store << ',' << r.t2_load << ',' << r.t2_store << ',' << r.ai1
     << ',' << r.ai2 << '\n';
}

}  // namespace mgk

#endif  // MGK_COUNTERS_HPP
