/*
 * Copyright 2026 The mieeg Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <doctest.h>

#include <cmath>
#include <random>

#include "mieeg/dsp/bandpass.hpp"
#include "mieeg/dsp/resample.hpp"
#include "mieeg/error.hpp"
#include "oracles.hpp"

using namespace mieeg;
using namespace mieeg::dsp;

namespace {

Trial one_channel(const Eigen::VectorXd& x, double fs) {
  Trial t;
  t.data = x.transpose();
  t.fs = fs;
  t.channels = {"Cz"};
  return t;
}

double db(double ratio) { return 20.0 * std::log10(ratio); }

}  // namespace

TEST_CASE("bandpass keeps a 15 Hz tone and rejects 2 Hz and 50 Hz") {
  const double fs = 250.0;
  const Eigen::Index n = 1000;
  auto through = [&](double hz) {
    const Eigen::VectorXd x = oracle::sine(n, hz, fs);
    const Eigen::VectorXd y = bandpass(one_channel(x, fs)).data.row(0).transpose();
    return std::pair{oracle::tone_amplitude(y, hz, fs) / oracle::tone_amplitude(x, hz, fs), oracle::rms(y) / oracle::rms(x)};
  };
  const auto [pass_amp, pass_rms] = through(15.0);
  CHECK(std::abs(pass_rms - 1.0) < 0.05);
  CHECK(std::abs(pass_amp - 1.0) < 0.05);
  CHECK(db(pass_amp) - db(through(2.0).first) >= 20.0);
  CHECK(db(pass_amp) - db(through(50.0).first) >= 20.0);
}

TEST_CASE("designed sections hit -3 dB at the band edges and unit gain in the band") {
  const FilterSpec spec;
  const auto sos = butterworth_bandpass(spec, 250.0);
  CHECK(sos.size() == 4);
  CHECK(std::abs(std::abs(frequency_response(sos, spec.low_hz, 250.0)) - M_SQRT1_2) < 1e-9);
  CHECK(std::abs(std::abs(frequency_response(sos, spec.high_hz, 250.0)) - M_SQRT1_2) < 1e-9);
  const double centre = std::atan(std::sqrt(std::tan(M_PI * 8 / 250) * std::tan(M_PI * 30 / 250))) * 250 / M_PI;
  CHECK(std::abs(std::abs(frequency_response(sos, centre, 250.0)) - 1.0) < 1e-9);
  CHECK(std::abs(frequency_response(sos, 0.0, 250.0)) < 1e-12);
  CHECK(std::abs(frequency_response(sos, 125.0, 250.0)) < 1e-12);
}

TEST_CASE("bandpass basics") {
  SUBCASE("zero in, zero out") {
    Trial t = one_channel(Eigen::VectorXd::Zero(300), 250);
    CHECK(bandpass(t).data.isZero(0.0));
  }
  SUBCASE("errors") {
    Trial t = one_channel(Eigen::VectorXd::Ones(300), 50.0);
    CHECK_THROWS_AS(bandpass(t), InvalidArgument);  // 30 Hz above Nyquist
    t = one_channel(Eigen::VectorXd::Ones(12), 250.0);
    CHECK_THROWS_AS(bandpass(t), InvalidArgument);
    t = one_channel(Eigen::VectorXd::Ones(300), 250.0);
    CHECK_THROWS_AS(bandpass(t, FilterSpec{30, 8, 4}), InvalidArgument);
  }
}

TEST_CASE("bandpass is zero phase: commutes with time reversal per channel") {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd x = oracle::random_matrix(3, 517, rng);
  const Eigen::MatrixXd y = bandpass(x, {}, 250.0);
  const Eigen::MatrixXd y_rev = bandpass(x.rowwise().reverse(), {}, 250.0);
  CHECK((y_rev - y.rowwise().reverse()).norm() <= 1e-10 * y.norm());

  // No group delay: a passband tone keeps its phase.
  const Eigen::VectorXd tone = oracle::sine(1000, 17.0, 250.0);
  const Eigen::VectorXd out = filtfilt(butterworth_bandpass({}, 250.0), tone);
  CHECK((out.segment(200, 600) - tone.segment(200, 600)).cwiseAbs().maxCoeff() < 0.05);
}

TEST_CASE("bandpass and resample are linear") {
  std::mt19937_64 rng(9);
  for (int iter = 0; iter < 5; ++iter) {
    const Eigen::MatrixXd x = oracle::random_matrix(4, 640, rng);
    const Eigen::MatrixXd y = oracle::random_matrix(4, 640, rng);
    const double a = 1.7, b = -0.3;
    const Eigen::MatrixXd bp_lhs = bandpass(a * x + b * y, {}, 256.0);
    const Eigen::MatrixXd bp_rhs = a * bandpass(x, {}, 256.0) + b * bandpass(y, {}, 256.0);
    CHECK((bp_lhs - bp_rhs).norm() <= 1e-6 * bp_rhs.norm());

    const PolyphaseResampler r(256.0, 250.0);
    const Eigen::MatrixXd rs_lhs = r.apply_rows(a * x + b * y);
    const Eigen::MatrixXd rs_rhs = a * r.apply_rows(x) + b * r.apply_rows(y);
    CHECK((rs_lhs - rs_rhs).norm() <= 1e-6 * rs_rhs.norm());
  }
}

TEST_CASE("bandpass twice is close to bandpass once inside the passband") {
  const double fs = 250.0;
  const Eigen::VectorXd x = oracle::sine(2000, 14.0, fs) + 0.5 * oracle::sine(2000, 18.0, fs, 1.0, 0.4) +
                            0.7 * oracle::sine(2000, 22.0, fs, 1.0, 1.1);
  const Eigen::MatrixXd once = bandpass(Eigen::MatrixXd(x.transpose()), {}, fs);
  const Eigen::MatrixXd twice = bandpass(once, {}, fs);
  CHECK((twice - once).norm() <= 1e-2 * once.norm());
}

TEST_CASE("resample length contract and identity") {
  CHECK(PolyphaseResampler(512, 250).output_length(1024) == 500);
  CHECK(PolyphaseResampler(160, 250).output_length(640) == 1000);
  CHECK(PolyphaseResampler(1000, 250).output_length(4001) == 1000);  // round(1000.25)

  std::mt19937_64 rng(4);
  Trial t;
  t.data = oracle::random_matrix(2, 300, rng);
  t.fs = 250.0;
  t.channels = {"C3", "C4"};
  const Trial same = resample(t);
  CHECK(same.data == t.data);

  t.fs = 512.0;
  t.data = oracle::random_matrix(2, 1024, rng);
  const Trial down = resample(t);
  CHECK(down.data.cols() == 500);
  CHECK(down.fs == 250.0);

  t.data = oracle::random_matrix(2, 3, rng);
  t.fs = 1000.0;
  CHECK_THROWS_AS(resample(t), InvalidArgument);  // round(3 * 250 / 1000) = 1
}

TEST_CASE("resample 512 to 250 Hz keeps a 10 Hz tone") {
  const Eigen::VectorXd x = oracle::sine(1024, 10.0, 512.0);
  const Eigen::VectorXd y = PolyphaseResampler(512, 250).apply(x);
  REQUIRE(y.size() == 500);
  CHECK(std::abs(oracle::peak_frequency(y, 250.0) - 10.0) <= 0.5);
  const double amp = oracle::tone_amplitude(y, 10.0, 250.0);
  CHECK(std::abs(amp - oracle::tone_amplitude(x, 10.0, 512.0)) < 0.05);
  // interior samples agree with the analytic tone
  const Eigen::VectorXd truth = oracle::sine(500, 10.0, 250.0);
  CHECK((y.segment(50, 400) - truth.segment(50, 400)).cwiseAbs().maxCoeff() < 0.01);
}

TEST_CASE("resample rejects content above the new Nyquist") {
  const Eigen::VectorXd x = oracle::sine(2048, 200.0, 512.0);
  const Eigen::VectorXd y = PolyphaseResampler(512, 250).apply(x);
  // 200 Hz would alias to 50 Hz at 250 Hz
  CHECK(oracle::tone_amplitude(y, 50.0, 250.0) < 0.01);
}

TEST_CASE("resample round trip preserves a band-limited signal") {
  struct Case {
    double f, g;
    Eigen::Index n;  // chosen so both legs of the length rule are exact
  };
  for (auto [f, g, n] : {Case{512.0, 250.0, 2048}, Case{250.0, 512.0, 1000}, Case{160.0, 250.0, 1600}}) {
    const double top = std::min(f, g) / 4.0;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
    for (double hz : {top * 0.2, top * 0.55, top}) x += oracle::sine(n, hz, f, 1.0, hz);
    const Eigen::VectorXd there = PolyphaseResampler(f, g).apply(x);
    const Eigen::VectorXd back = PolyphaseResampler(g, f).apply(there);
    REQUIRE(back.size() == x.size());
    CAPTURE(f);
    CAPTURE(g);
    CHECK(oracle::rms(back - x) <= 0.02 * oracle::rms(x));
  }
}

TEST_CASE("Kaiser window Bessel function matches the standard library") {
  for (double x : {0.0, 0.5, 1.0, 4.3, 8.6, 20.0}) CHECK(bessel_i0(x) == doctest::Approx(std::cyl_bessel_i(0.0, x)).epsilon(1e-12));
}
