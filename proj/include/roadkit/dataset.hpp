#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace roadkit {

enum class Split { train, val, test, unassigned };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

struct SampleRecord {
    std::string sample_id;
    std::string image_uri;          // relative to the manifest's directory
    std::string mask_uri;           // empty == absent
    std::string label;
    std::string domain;
    Split split = Split::unassigned;

    friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

/// Ordered sample list plus the label set it is expressed in. Operations
/// return new manifests; records are never mutated in place.
struct Manifest {
    std::vector<SampleRecord> records;
    std::vector<std::string> label_set;
    nlohmann::ordered_json provenance;  // creation parameters

    std::map<std::string, std::int64_t> class_counts() const;
    std::vector<const SampleRecord*> in_split(Split s) const;
};

/// Checks sample_id uniqueness and that every label is in label_set.
void validate_manifest(const Manifest& m);

/// Exactly per_class samples per label, drawn uniformly without
/// replacement, deterministic in seed. Original record order is kept.
Manifest balance_subset(const Manifest& m, std::int64_t per_class, std::uint64_t seed);

/// Maps `isolated` to class "isolated", the alternates to "other", and
/// drops everything else. label_set becomes {"isolated", "other"}.
Manifest binarize_labels(const Manifest& m, const std::string& isolated,
                         const std::vector<std::string>& alternates);

/// w_c = N / (C * N_c). Balanced data gives all-ones.
std::map<std::string, double> class_weights(const Manifest& m);

struct SplitFractions {
    double train = 0.8;
    double val = 0.2;
    double test = 0.0;
};

/// Stratified split: per-class counts match the fractions to within one
/// sample (largest-remainder apportionment), deterministic in seed.
Manifest split_manifest(const Manifest& m, SplitFractions fractions, std::uint64_t seed);

Manifest filter_domain(const Manifest& m, const std::string& domain);

// JSONL persistence. First line is a {"provenance": ...} header; every
// following line is one record with keys exactly
// sample_id, image_uri, mask_uri, label, domain, split.
void write_manifest(const Manifest& m, const std::filesystem::path& path);
Manifest read_manifest(const std::filesystem::path& path);

}  // namespace roadkit
