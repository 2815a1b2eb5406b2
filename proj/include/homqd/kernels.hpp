#pragma once

// Data-parallel inner loops. Every kernel has a serial reference in
// homqd::kernels::serial and an OpenMP version in homqd::kernels::omp with
// identical per-element arithmetic, so both produce bit-identical output
// regardless of thread count. The library calls the OpenMP versions; tests
// and the benchmark compare them against the serial ones.

#include <span>

#include "homqd/spectrum.hpp"

namespace homqd::kernels {

// Inputs shared by the cascaded-interferometer kernels.
struct DetuningNodes {
    std::span<const double> detuning;  // nu2 - nu1, THz
    std::span<const double> weight;    // quadrature weight incl. spectral density
    double center_thz = 0.0;           // nu_0, the degenerate frequency
};

// Coincidence probability between the opposite outputs of the second
// beamsplitter, conditioned on an anti-bunched pair after the first one.
// Evaluated from the four cascaded two-photon amplitudes; out[i] belongs to
// tau2[i]. Throws NumericError when the anti-bunched weight vanishes.
struct CascadedFringeArgs {
    DetuningNodes nodes;
    double tau1_ps = 0.0;
    std::span<const double> tau2_ps;
    std::span<double> out;
};

// Pixel-averaged coincidence spectrum after the first beamsplitter on a
// square frequency grid. out is row-major (signal row, idler column) and
// holds f * |1 - exp(i 2 pi (nu2 - nu1) tau1)|^2 / 4.
struct CoincidenceMapArgs {
    BiphotonSpectrumModel model;
    FrequencyGrid grid;
    double tau1_ps = 0.0;
    std::span<double> out;
};

namespace serial {
void cascaded_fringe(const CascadedFringeArgs& args);
void coincidence_map(const CoincidenceMapArgs& args);
}  // namespace serial

namespace omp {
void cascaded_fringe(const CascadedFringeArgs& args);
void coincidence_map(const CoincidenceMapArgs& args);
int max_threads();
}  // namespace omp

}  // namespace homqd::kernels
