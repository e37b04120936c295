#include "tg/constant_cache.hpp"

#include <cmath>
#include <fstream>
#include <mutex>
#include "json.hpp"
#include <sstream>

#include "tg/error.hpp"
#include "tg/version.hpp"

namespace tg {

std::string ConstantCache::key(const LatticeBasis& basis) {
    std::ostringstream out;
    const double parts[] = {basis.omega1().real(), basis.omega1().imag(), basis.omega2().real(),
                            basis.omega2().imag()};
    for (int i = 0; i < 4; ++i) {
        if (i) {
            out << ',';
        }
        out << std::llround(parts[i] * 1e14);
    }
    return out.str();
}

std::optional<GreenConstants> ConstantCache::find(const LatticeBasis& basis) const {
    const std::string k = key(basis);
    std::shared_lock lock(mutex_);
    const auto it = entries_.find(k);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

GreenConstants ConstantCache::get_or_compute(const LatticeBasis& basis,
                                             const std::function<GreenConstants()>& compute) {
    if (auto hit = find(basis)) {
        return *hit;
    }
    const GreenConstants fresh = compute();
    std::unique_lock lock(mutex_);
    return entries_.emplace(key(basis), fresh).first->second;
}

void ConstantCache::insert(const LatticeBasis& basis, const GreenConstants& constants) {
    std::unique_lock lock(mutex_);
    entries_.insert_or_assign(key(basis), constants);
}

std::size_t ConstantCache::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

void ConstantCache::clear() {
    std::unique_lock lock(mutex_);
    entries_.clear();
}

void ConstantCache::load(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) {
        return;
    }
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception&) {
        return;  // unreadable cache is treated as empty
    }
    if (!doc.is_object() || doc.value("version", std::string{}) != tool_version ||
        !doc.contains("entries") || !doc["entries"].is_object()) {
        return;
    }
    std::unique_lock lock(mutex_);
    for (const auto& [k, v] : doc["entries"].items()) {
        if (v.contains("normalization") && v.contains("robin")) {
            entries_.insert_or_assign(
                k, GreenConstants{v["normalization"].get<double>(), v["robin"].get<double>()});
        }
    }
}

void ConstantCache::save(const std::filesystem::path& file) const {
    nlohmann::json doc;
    doc["version"] = tool_version;
    doc["entries"] = nlohmann::json::object();
    {
        std::shared_lock lock(mutex_);
        for (const auto& [k, v] : entries_) {
            doc["entries"][k] = {{"normalization", v.normalization}, {"robin", v.robin}};
        }
    }
    if (file.has_parent_path()) {
        std::filesystem::create_directories(file.parent_path());
    }
    const auto tmp = std::filesystem::path(file.string() + ".tmp");
    {
        std::ofstream out(tmp);
        if (!out) {
            throw Error("cannot write cache file " + tmp.string());
        }
        out << doc.dump(2) << '\n';
    }
    std::filesystem::rename(tmp, file);
}

ConstantCache& ConstantCache::global() {
    static ConstantCache instance;
    return instance;
}

}  // namespace tg
