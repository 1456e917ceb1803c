// SPDX-License-Identifier: Apache-2.0
//
// mpcprof: multipath component profiling, tracking and prediction
// Copyright (C) 2026 The mpcprof Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "mpcprof/esprit.hpp"

#include "mpcprof/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mpcprof
{

namespace
{

using Eigen::Index;

// Relative singular value below which the signal subspace counts as rank
// deficient.
constexpr double rank_tolerance = 1e-12;

Eigen::MatrixXcd exchange(Index n)
{
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(n, n);
    for (Index k = 0; k < n; ++k)
        p(k, n - 1 - k) = 1.0;
    return p;
}

void check_rank(const Eigen::VectorXd &s, std::size_t l)
{
    const double top = s.size() > 0 ? s(0) : 0.0;
    if (!(top > 0.0) || static_cast<std::size_t>(s.size()) < l ||
        !(s(static_cast<Index>(l) - 1) > rank_tolerance * top))
    {
        const double last = static_cast<std::size_t>(s.size()) >= l ? s(static_cast<Index>(l) - 1) : 0.0;
        throw EstimationError("esprit: signal subspace rank below " + std::to_string(l) + " (sigma_1 = " +
                              std::to_string(top) + ", sigma_L = " + std::to_string(last) + ")");
    }
}

double fold_delay(double tau, double period)
{
    double t = std::fmod(tau, period);
    if (t < 0.0)
        t += period;
    if (t >= period)
        t = 0.0;
    return t;
}

} // namespace

EspritConfig EspritConfig::defaults(const SystemConfig &sys, std::size_t model_order)
{
    EspritConfig c;
    c.model_order = model_order;
    c.subarray_length = static_cast<std::size_t>(2 * sys.m_prb / 3);
    return c;
}

std::size_t EspritConfig::resolved_subarray(std::size_t m) const
{
    return subarray_length == 0 ? 2 * m / 3 : subarray_length;
}

void EspritConfig::validate(std::size_t m) const
{
    const std::size_t k = resolved_subarray(m);
    if (model_order < 1)
        throw ConfigError("esprit: model_order must be at least 1");
    if (!(k > model_order))
        throw ConfigError("esprit: subarray_length " + std::to_string(k) + " must exceed model_order " +
                          std::to_string(model_order));
    if (!(k < m))
        throw ConfigError("esprit: subarray_length " + std::to_string(k) + " must be below M = " + std::to_string(m));
}

Eigen::MatrixXcd unitary_q(std::size_t n)
{
    const Index half = static_cast<Index>(n / 2);
    const double r = 1.0 / std::sqrt(2.0);
    const cdouble j{0.0, 1.0};
    Eigen::MatrixXcd q = Eigen::MatrixXcd::Zero(static_cast<Index>(n), static_cast<Index>(n));
    const Index tail = static_cast<Index>(n) - half; // first row of the lower block
    for (Index k = 0; k < half; ++k)
    {
        q(k, k) = r;
        q(k, tail + k) = j * r;
        // Lower block rows are the exchange of the upper ones.
        q(static_cast<Index>(n) - 1 - k, k) = r;
        q(static_cast<Index>(n) - 1 - k, tail + k) = -j * r;
    }
    if (n % 2 == 1)
        q(half, half) = 1.0;
    return q;
}

std::vector<double> esprit_delays(const Eigen::VectorXcd &freq_response, const EspritConfig &cfg,
                                  const SystemConfig &sys)
{
    const auto m = static_cast<std::size_t>(freq_response.size());
    cfg.validate(m);
    const std::size_t k = cfg.resolved_subarray(m);
    const std::size_t l = cfg.model_order;
    const Index kk = static_cast<Index>(k);
    const Index nn = static_cast<Index>(m - k + 1);

    Eigen::MatrixXcd x(kk, nn);
    for (Index r = 0; r < kk; ++r)
        for (Index c = 0; c < nn; ++c)
            x(r, c) = freq_response(r + c);

    Eigen::VectorXcd z(static_cast<Index>(l));
    if (cfg.use_forward_backward)
    {
        // Real-valued transform of the forward-backward averaged data.
        Eigen::MatrixXcd fb(kk, 2 * nn);
        fb << x, exchange(kk) * x.conjugate() * exchange(nn);
        const Eigen::MatrixXd t = (unitary_q(k).adjoint() * fb * unitary_q(2 * m - 2 * k + 2)).real();
        Eigen::BDCSVD<Eigen::MatrixXd> svd(t, Eigen::ComputeThinU);
        check_rank(svd.singularValues(), l);
        const Eigen::MatrixXd es = svd.matrixU().leftCols(static_cast<Index>(l));

        Eigen::MatrixXcd j2 = Eigen::MatrixXcd::Zero(kk - 1, kk);
        for (Index r = 0; r < kk - 1; ++r)
            j2(r, r + 1) = 1.0;
        const Eigen::MatrixXcd qj = unitary_q(k - 1).adjoint() * j2 * unitary_q(k);
        const Eigen::MatrixXd k1 = qj.real();
        const Eigen::MatrixXd k2 = qj.imag();
        const Eigen::MatrixXd lhs = k1 * es;
        const Eigen::MatrixXd rhs = k2 * es;
        const Eigen::MatrixXd upsilon = lhs.colPivHouseholderQr().solve(rhs);
        Eigen::EigenSolver<Eigen::MatrixXd> eig(upsilon, false);
        const Eigen::VectorXcd w = eig.eigenvalues();
        for (Index i = 0; i < static_cast<Index>(l); ++i)
        {
            // Complex eigenvalues only arise from noise; their real part
            // carries the closest real solution.
            const double mu = 2.0 * std::atan(w(i).real());
            z(i) = std::polar(1.0, mu);
        }
    }
    else
    {
        Eigen::BDCSVD<Eigen::MatrixXcd> svd(x, Eigen::ComputeThinU);
        check_rank(svd.singularValues(), l);
        const Eigen::MatrixXcd es = svd.matrixU().leftCols(static_cast<Index>(l));
        const Eigen::MatrixXcd e1 = es.topRows(kk - 1);
        const Eigen::MatrixXcd e2 = es.bottomRows(kk - 1);
        const Eigen::MatrixXcd psi = e1.colPivHouseholderQr().solve(e2);
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> eig(psi, false);
        z = eig.eigenvalues();
    }

    const double period = 1.0 / sys.csi_rs_spacing;
    std::vector<double> delays(l);
    for (std::size_t i = 0; i < l; ++i)
        delays[i] = fold_delay(-std::arg(z(static_cast<Index>(i))) / (two_pi * sys.csi_rs_spacing), period);
    std::sort(delays.begin(), delays.end());
    return delays;
}

LsAmpPhase ls_amp_phase(const std::vector<double> &delays, const Eigen::VectorXcd &freq_response,
                        const SystemConfig &sys)
{
    if (delays.empty())
        throw DomainError("ls_amp_phase: no delays");
    const Index m = freq_response.size();
    const Index l = static_cast<Index>(delays.size());
    Eigen::MatrixXcd a(m, l);
    for (Index f = 0; f < m; ++f)
        for (Index c = 0; c < l; ++c)
            a(f, c) = std::polar(1.0, -two_pi * static_cast<double>(f) * sys.csi_rs_spacing * delays[static_cast<std::size_t>(c)]);

    Eigen::BDCSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd s = svd.singularValues();
    LsAmpPhase out;
    const double smin = s(s.size() - 1);
    out.condition_number = smin > 0.0 ? s(0) / smin : std::numeric_limits<double>::infinity();
    out.ill_conditioned = !(out.condition_number <= ls_condition_limit);
    const Eigen::VectorXcd x = svd.solve(freq_response);
    out.theta.mpcs.resize(delays.size());
    for (Index c = 0; c < l; ++c)
    {
        auto &p = out.theta.mpcs[static_cast<std::size_t>(c)];
        p.tau = delays[static_cast<std::size_t>(c)];
        p.alpha = std::abs(x(c));
        p.phi = wrap_phase(std::arg(x(c)));
    }
    return out;
}

} // namespace mpcprof
