#pragma once

#include "sepam/lattice.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace sepam {

struct Configuration {
    Torus torus;
    std::vector<std::uint8_t> bits;

    std::size_t count() const;
    bool operator==(const Configuration& o) const { return bits == o.bits; }
    std::string bitstring() const;
};

Configuration sample_initial(const Torus& T, double rho, std::uint64_t seed);
Configuration sample_initial(const Torus& T, double rho, std::mt19937_64& g);
Configuration filled(const Torus& T, bool value);

// Unoriented bond {a, b} carrying links at Poisson rate `rate`.
struct Bond {
    std::size_t a, b;
    double rate;
};

// One bond per site and per offset with positive leading coordinate, so
// every unoriented pair is listed once (twice on an L = 2 torus, where the
// two geometric bonds really are distinct).  rate = kernel.rate * p(a, b).
std::vector<Bond> stirring_bonds(const Torus& T, const Kernel& k);

struct Link {
    double t;
    std::uint32_t bond;
};

struct LinkSchedule {
    double horizon = 0;
    std::vector<Bond> bonds;
    std::vector<Link> events; // sorted by time; ties keep generation order
};

LinkSchedule build_schedule(const Torus& T, const Kernel& k, double horizon, std::uint64_t seed);
LinkSchedule build_schedule(const Torus& T, const Kernel& k, double horizon, std::mt19937_64& g);

struct Trajectory {
    Configuration initial;
    LinkSchedule schedule;
};

// Apply every link with time <= t.
Configuration evolve(const Trajectory& tr, double t);
// int_0^t xi_s(site) ds, exact.
double occupation_time(const Trajectory& tr, std::size_t site, double t);
// (time, bitstring) lines for the given query times
std::string export_checkpoints(const Trajectory& tr, const std::vector<double>& times);

} // namespace sepam
