#pragma once

#include <stdexcept>

#include "rssforge/hcfg/model_io.hpp"
#include "rssforge/symbolic/rational.hpp"

namespace rssforge::scenarios {

using hcfg::ModelDocument;
using symbolic::Rational;

struct Interval {
  Rational start;
  Rational end;
};

struct IntersectionParams {
  Rational b = 5;
  Rational a_max = 2;
  Rational rho = Rational(3, 10);
  // Zone length 5 m. On the experiment grid no SV stopping point lands
  // exactly on a zone end at this length.
  Interval cz_sv{Rational(-5, 2), Rational(5, 2)};
  Interval cz_pov{Rational(-5, 2), Rational(5, 2)};
  // Also finalize tuples where SV has stopped before the collision zone.
  bool stopped_before_cz_final = true;

  // Both lanes get the zone [-L/2, L/2] around the crossing point.
  static IntersectionParams with_cz_length(const Rational& length);
  // Throws std::invalid_argument on b <= 0, a_max < 0, rho < 0 or an empty zone.
  void validate() const;
};

struct RssParams {
  Rational rho = Rational(3, 10);
  Rational a_max = 2;
  Rational b_min = 5;
  Rational b_max = 5;

  void validate() const;
};

class NegativeSpeed : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Safety distance between a front car at v_f and a rear car at v_r.
double drss(double v_f, double v_r, const RssParams& p);
// The same quantity before clamping at zero, as an exact term in v_f and v_r.
symbolic::Term drss_raw_term(const RssParams& p);

// Variable names shared by builders, simulator and experiments.
namespace vars {
inline const symbolic::Var x_sv{"x_SV"};
inline const symbolic::Var v_sv{"v_SV"};
inline const symbolic::Var t_sv{"t_SV"};
inline const symbolic::Var x_pov{"x_POV"};
inline const symbolic::Var v_pov{"v_POV"};
inline const symbolic::Var x_pov_max{"x_POV_max"};
inline const symbolic::Var x_pov_min{"x_POV_min"};
inline const symbolic::Var v_pov_max{"v_POV_max"};
inline const symbolic::Var v_pov_min{"v_POV_min"};
inline const symbolic::Var t_pov{"t_POV"};

inline const symbolic::Var y_f{"y_f"};
inline const symbolic::Var y_r{"y_r"};
inline const symbolic::Var v_f{"v_f"};
inline const symbolic::Var v_r{"v_r"};
inline const symbolic::Var t_r{"t_r"};
}  // namespace vars

// Six open components: SVPos, SVVel, SVTimer, POVPos, POVVel, POVTimer.
// Positions are lane coordinates growing in the driving direction, so a car
// d metres before the crossing point sits at -d.
ModelDocument build_intersection(const IntersectionParams& p = {});

// Rear car accelerates at a_max for rho, then brakes at b_min to a stop;
// the front car brakes at b_max to a stop. Unsafe once y_r >= y_f.
ModelDocument build_oneway(const RssParams& p = {});

}  // namespace rssforge::scenarios
