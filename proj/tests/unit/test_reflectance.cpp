#include "doctest.h"

#include "firescan/reflectance.hpp"
#include "synthetic.hpp"

#include <array>
#include <cmath>

using namespace firescan;

namespace {

Scene flat_scene(std::uint16_t dn, double sun_elevation) {
  Scene s = testing::make_scene(2, 2, 1, {.fire_blobs = 0, .water = false, .nodata_corners = false});
  s.sun_elevation_deg = sun_elevation;
  for (int ch : kReflectiveChannels) {
    s.bands.at(ch).setConstant(dn);
    s.refl_mult[ch] = 2.0e-5;
    s.refl_add[ch] = -0.1;
  }
  return s;
}

}  // namespace

TEST_CASE("linear rescaling") {
  const auto st = to_reflectance(flat_scene(30000, 30.0), false);
  CHECK_FALSE(st.solar_corrected);
  CHECK(st.band(7)(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(st.valid.all());
  CHECK(st.has_channel(9));
  CHECK_FALSE(st.has_channel(10));
}

TEST_CASE("solar-zenith correction divides by sin(elevation)") {
  const auto st = to_reflectance(flat_scene(30000, 30.0), true);
  CHECK(st.solar_corrected);
  CHECK(st.band(5)(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(solar_divisor(90.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(solar_divisor(0.0), std::invalid_argument);
  CHECK_THROWS_AS(solar_divisor(-3.0), std::invalid_argument);
}

TEST_CASE("fill pixels convert to the additive offset and are flagged invalid") {
  Scene s = flat_scene(30000, 30.0);
  for (int ch : kReflectiveChannels) s.bands.at(ch)(0, 1) = 0;
  const auto st = to_reflectance(s, false);
  CHECK(st.band(1)(0, 1) == doctest::Approx(-0.1).epsilon(1e-12));
  CHECK_FALSE(st.valid(0, 1));
  CHECK(st.valid(0, 0));
  CHECK(st.valid.count() == 3);
}

TEST_CASE("values are never clamped") {
  Scene s = flat_scene(1000, 30.0);
  s.bands.at(7).setConstant(65535);
  const auto st = to_reflectance(s, false);
  CHECK(st.band(1)(0, 0) == doctest::Approx(-0.08));
  CHECK(st.band(7)(0, 0) == doctest::Approx(1.2107));
}

TEST_CASE("deferred correction is bit-identical to direct conversion") {
  const Scene s = testing::make_scene(97, 61, 8);
  const auto direct = to_reflectance(s, true);
  const auto later = with_solar_correction(to_reflectance(s, false), s.sun_elevation_deg);
  CHECK(later.solar_corrected);
  CHECK((later.valid == direct.valid).all());
  for (int ch : kReflectiveChannels) CHECK((later.band(ch) == direct.band(ch)).all());
  CHECK_THROWS_AS(with_solar_correction(direct, 30.0), std::invalid_argument);
}

TEST_CASE("row band and channel subset match the full conversion") {
  const Scene s = testing::make_scene(50, 40, 9);
  const auto full = to_reflectance(s, true);
  const std::array<int, 3> chans{5, 6, 7};
  const auto part = to_reflectance(s, true, RowRange{10, 7}, chans);
  CHECK(part.height() == 7);
  CHECK(part.width() == 50);
  CHECK_FALSE(part.has_channel(1));
  for (int ch : chans) CHECK((part.band(ch) == full.band(ch).middleRows(10, 7)).all());
  CHECK((part.valid == full.valid.middleRows(10, 7)).all());
  CHECK_THROWS_AS(to_reflectance(s, true, RowRange{35, 10}, chans), std::out_of_range);
  CHECK_THROWS_AS(part.band(1), std::invalid_argument);
}
