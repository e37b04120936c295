#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>

#include "tg/lattice.hpp"

namespace tg {

/// Per-basis constants of the Green's function.
struct GreenConstants {
    double normalization = 0.0;  // additive constant of the theta representation
    double robin = 0.0;          // lim_{x->0} G(x) + ln|x| / (2 pi)
};

/// Thread-safe map from basis to GreenConstants.
///
/// Keys are the four basis coordinates rounded to 1e-14. Lookups take a shared
/// lock; an insert takes the exclusive lock only for the map update, so the
/// computation of a missing entry never blocks readers. Two threads racing on
/// the same missing key may both compute it; the first insert wins.
class ConstantCache {
public:
    static std::string key(const LatticeBasis& basis);

    std::optional<GreenConstants> find(const LatticeBasis& basis) const;
    GreenConstants get_or_compute(const LatticeBasis& basis,
                                  const std::function<GreenConstants()>& compute);
    void insert(const LatticeBasis& basis, const GreenConstants& constants);

    std::size_t size() const;
    void clear();

    /// JSON file {"version": ..., "entries": {key: {normalization, robin}}}.
    /// A file written by another tool version is ignored on load.
    void load(const std::filesystem::path& file);
    void save(const std::filesystem::path& file) const;

    /// Process-wide instance used by GreenFunction.
    static ConstantCache& global();

private:
    mutable std::shared_mutex mutex_;
    std::map<std::string, GreenConstants> entries_;
};

}  // namespace tg
