#include "pvdc/manifest.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "pvdc/rng.hpp"

namespace pvdc {

void DatasetManifest::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << "#pvdc-manifest v" << kVersion << "\n";
    out << "#id\tpath\tsplit\tseed\tsigma\tholes\thole_radius\tsmooth_lambda\tsmooth_iters\n";
    out.precision(17);
    for (const auto& e : entries) {
        out << e.id << "\t" << e.path << "\t" << (e.split.empty() ? "-" : e.split) << "\t"
            << e.seed << "\t" << e.corruption.gaussian_sigma << "\t" << e.corruption.hole_count
            << "\t" << e.corruption.hole_radius << "\t" << e.corruption.smoothing_lambda << "\t"
            << e.corruption.smoothing_iterations << "\n";
    }
    if (!out) throw Error("write failed: " + path);
}

DatasetManifest DatasetManifest::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError(path + ": empty manifest");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "#pvdc-manifest v1")
        throw ParseError(path + ":1: bad manifest header '" + line + "'");

    DatasetManifest m;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        ManifestEntry e;
        std::string split;
        if (!(ls >> e.id >> e.path >> split >> e.seed >> e.corruption.gaussian_sigma >>
              e.corruption.hole_count >> e.corruption.hole_radius >>
              e.corruption.smoothing_lambda >> e.corruption.smoothing_iterations))
            throw ParseError(path + ":" + std::to_string(lineno) + ": malformed manifest record");
        e.split = split == "-" ? "" : split;
        e.corruption.validate();
        m.entries.push_back(std::move(e));
    }
    return m;
}

DatasetManifest split_dataset(std::vector<ManifestEntry> entries,
                              const std::array<double, 3>& proportions, std::uint64_t seed) {
    double total = 0;
    for (double p : proportions) {
        if (p < 0) throw ConfigError("split_dataset: proportions must be >= 0");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw ConfigError("split_dataset: proportions must sum to 1");
    std::size_t folds_needed = 0;
    for (double p : proportions)
        if (p > 0) ++folds_needed;
    if (entries.size() < folds_needed)
        throw ContractError("split_dataset: fewer entries (" + std::to_string(entries.size()) +
                            ") than non-empty folds (" + std::to_string(folds_needed) + ")");

    Rng rng(derive_seed(seed, 7));
    rng.shuffle(entries.begin(), entries.end());

    const std::size_t n = entries.size();
    const std::size_t n_train = std::size_t(std::floor(proportions[0] * double(n)));
    const std::size_t n_val = std::size_t(std::floor(proportions[1] * double(n)));
    for (std::size_t i = 0; i < n; ++i) {
        if (i < n_train) entries[i].split = "train";
        else if (i < n_train + n_val) entries[i].split = "val";
        else entries[i].split = "test";
    }
    DatasetManifest m;
    m.entries = std::move(entries);
    return m;
}

} // namespace pvdc
