#include "roadkit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "roadkit/rng.hpp"

namespace roadkit {

using ordered_json = nlohmann::ordered_json;

std::string to_string(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
        case Split::unassigned: return "unassigned";
    }
    throw std::logic_error("bad split value");
}

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::train;
    if (s == "val") return Split::val;
    if (s == "test") return Split::test;
    if (s == "unassigned") return Split::unassigned;
    throw std::invalid_argument("unknown split: " + s);
}

std::map<std::string, std::int64_t> Manifest::class_counts() const {
    std::map<std::string, std::int64_t> counts;
    for (const auto& name : label_set) counts[name] = 0;
    for (const auto& r : records) counts[r.label] += 1;
    return counts;
}

std::vector<const SampleRecord*> Manifest::in_split(Split s) const {
    std::vector<const SampleRecord*> out;
    for (const auto& r : records) {
        if (r.split == s) out.push_back(&r);
    }
    return out;
}

void validate_manifest(const Manifest& m) {
    std::set<std::string> ids;
    std::set<std::string> labels(m.label_set.begin(), m.label_set.end());
    for (const auto& r : m.records) {
        if (!ids.insert(r.sample_id).second) {
            throw std::runtime_error("duplicate sample_id: " + r.sample_id);
        }
        if (!labels.count(r.label)) {
            throw std::runtime_error("sample " + r.sample_id + " has label '" + r.label +
                                     "' outside the manifest label set");
        }
    }
}

Manifest balance_subset(const Manifest& m, std::int64_t per_class, std::uint64_t seed) {
    if (per_class < 1) throw std::invalid_argument("balance_subset: per_class must be >= 1");
    // indices per class, in manifest order
    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < m.records.size(); ++i) {
        members[m.records[i].label].push_back(i);
    }
    for (const auto& name : m.label_set) {
        const auto it = members.find(name);
        const std::int64_t have = it == members.end() ? 0 : static_cast<std::int64_t>(it->second.size());
        if (have < per_class) {
            throw std::runtime_error("balance_subset: class '" + name + "' has " +
                                     std::to_string(have) + " samples, needs " +
                                     std::to_string(per_class) + " (short by " +
                                     std::to_string(per_class - have) + ")");
        }
    }

    std::vector<bool> selected(m.records.size(), false);
    for (const auto& name : m.label_set) {
        auto& idx = members[name];
        Rng rng = Rng::keyed(seed, "balance_subset", name);
        // partial Fisher-Yates: the first per_class slots are the draw
        for (std::int64_t i = 0; i < per_class; ++i) {
            const std::size_t j = i + rng.next_below(idx.size() - i);
            std::swap(idx[i], idx[j]);
            selected[idx[i]] = true;
        }
    }

    Manifest out;
    out.label_set = m.label_set;
    out.provenance = m.provenance;
    for (std::size_t i = 0; i < m.records.size(); ++i) {
        if (selected[i]) out.records.push_back(m.records[i]);
    }
    return out;
}

Manifest binarize_labels(const Manifest& m, const std::string& isolated,
                         const std::vector<std::string>& alternates) {
    if (alternates.empty()) throw std::invalid_argument("binarize_labels: alternates must be nonempty");
    std::set<std::string> known(m.label_set.begin(), m.label_set.end());
    std::set<std::string> alt(alternates.begin(), alternates.end());
    if (!known.count(isolated)) {
        throw std::invalid_argument("binarize_labels: unknown isolated class '" + isolated + "'");
    }
    for (const auto& a : alternates) {
        if (!known.count(a)) throw std::invalid_argument("binarize_labels: unknown alternate class '" + a + "'");
    }
    if (alt.count(isolated)) {
        throw std::invalid_argument("binarize_labels: isolated class also listed as alternate");
    }

    Manifest out;
    out.label_set = {"isolated", "other"};
    out.provenance = m.provenance;
    for (const auto& r : m.records) {
        if (r.label == isolated) {
            SampleRecord nr = r;
            nr.label = "isolated";
            out.records.push_back(std::move(nr));
        } else if (alt.count(r.label)) {
            SampleRecord nr = r;
            nr.label = "other";
            out.records.push_back(std::move(nr));
        }
        // labels in neither set are dropped
    }
    return out;
}

std::map<std::string, double> class_weights(const Manifest& m) {
    const auto counts = m.class_counts();
    const double c = static_cast<double>(m.label_set.size());
    double n = 0.0;
    for (const auto& [name, count] : counts) {
        if (count == 0) throw std::runtime_error("class_weights: class '" + name + "' is empty");
        n += static_cast<double>(count);
    }
    std::map<std::string, double> weights;
    for (const auto& [name, count] : counts) {
        weights[name] = n / (c * static_cast<double>(count));
    }
    return weights;
}

namespace {

// Largest-remainder apportionment of n into three parts proportional to
// fractions; ties broken in (train, val, test) order.
std::array<std::int64_t, 3> apportion(std::int64_t n, const SplitFractions& f) {
    const std::array<double, 3> fr = {f.train, f.val, f.test};
    std::array<std::int64_t, 3> out{};
    std::array<double, 3> remainder{};
    std::int64_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        const double exact = fr[i] * static_cast<double>(n);
        out[i] = static_cast<std::int64_t>(std::floor(exact));
        remainder[i] = exact - static_cast<double>(out[i]);
        assigned += out[i];
    }
    std::int64_t left = n - assigned;
    std::array<int, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return remainder[a] > remainder[b]; });
    for (int k = 0; left > 0; k = (k + 1) % 3) {
        out[order[k]] += 1;
        --left;
    }
    return out;
}

}  // namespace

Manifest split_manifest(const Manifest& m, SplitFractions f, std::uint64_t seed) {
    if (f.train < 0 || f.val < 0 || f.test < 0 ||
        std::abs(f.train + f.val + f.test - 1.0) > 1e-9) {
        throw std::invalid_argument("split fractions must be nonnegative and sum to 1");
    }
    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < m.records.size(); ++i) {
        members[m.records[i].label].push_back(i);
    }

    Manifest out = m;
    for (auto& [name, idx] : members) {
        Rng rng = Rng::keyed(seed, "split", name);
        rng.shuffle(idx);
        const auto counts = apportion(static_cast<std::int64_t>(idx.size()), f);
        std::size_t pos = 0;
        const std::array<Split, 3> kinds = {Split::train, Split::val, Split::test};
        for (int k = 0; k < 3; ++k) {
            for (std::int64_t j = 0; j < counts[k]; ++j) {
                out.records[idx[pos++]].split = kinds[k];
            }
        }
    }
    return out;
}

Manifest filter_domain(const Manifest& m, const std::string& domain) {
    Manifest out;
    out.label_set = m.label_set;
    out.provenance = m.provenance;
    for (const auto& r : m.records) {
        if (r.domain == domain) out.records.push_back(r);
    }
    return out;
}

void write_manifest(const Manifest& m, const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    ordered_json header;
    header["provenance"] = m.provenance.is_null() ? ordered_json::object() : m.provenance;
    header["provenance"]["label_set"] = m.label_set;
    os << header.dump() << "\n";
    for (const auto& r : m.records) {
        ordered_json row;
        row["sample_id"] = r.sample_id;
        row["image_uri"] = r.image_uri;
        if (r.mask_uri.empty()) {
            row["mask_uri"] = nullptr;
        } else {
            row["mask_uri"] = r.mask_uri;
        }
        row["label"] = r.label;
        row["domain"] = r.domain;
        row["split"] = to_string(r.split);
        os << row.dump() << "\n";
    }
    if (!os) throw std::runtime_error("failed writing " + path.string());
}

Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open manifest " + path.string());
    Manifest m;
    std::string line;
    std::size_t line_no = 0;
    std::set<std::string> seen_labels;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (line_no == 1 && j.contains("provenance")) {
            m.provenance = j["provenance"];
            if (m.provenance.contains("label_set")) {
                m.label_set = m.provenance["label_set"].get<std::vector<std::string>>();
                m.provenance.erase("label_set");
            }
            continue;
        }
        SampleRecord r;
        r.sample_id = j.at("sample_id").get<std::string>();
        r.image_uri = j.at("image_uri").get<std::string>();
        if (j.contains("mask_uri") && !j["mask_uri"].is_null()) {
            r.mask_uri = j["mask_uri"].get<std::string>();
        }
        r.label = j.at("label").get<std::string>();
        r.domain = j.at("domain").get<std::string>();
        r.split = split_from_string(j.at("split").get<std::string>());
        seen_labels.insert(r.label);
        m.records.push_back(std::move(r));
    }
    if (m.label_set.empty()) {
        m.label_set.assign(seen_labels.begin(), seen_labels.end());
    }
    validate_manifest(m);
    return m;
}

}  // namespace roadkit
