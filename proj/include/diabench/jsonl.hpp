#ifndef DIABENCH_JSONL_HPP
#define DIABENCH_JSONL_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "diabench/domain.hpp"

namespace diabench::jsonl {

// Insertion-ordered JSON so line keys keep the documented fixed order.
using ojson = nlohmann::ordered_json;

inline constexpr std::string_view kCorpusFormat = "diabench.corpus.v1";
inline constexpr std::string_view kGeneratorVersion = "1.0.0";

ojson to_json(const ThresholdConfig& cfg);
ThresholdConfig threshold_config_from_json(const ojson& j);

/// Serialized with keys classification, criteria_triggered, next_steps and,
/// for monitoring, week and alert_level.
ojson to_json(const Adjudication& adj);

/// Strict parse for trusted inputs (corpus ground truth). Unknown labels or
/// tags raise RegistryError; model output goes through extraction instead.
Adjudication adjudication_from_json(const ojson& j, Scenario scenario);

/// Case line keys in fixed order: case_id, scenario, payload, ground_truth.
/// Cosmetic demographics, when present, ride inside the payload object.
ojson to_json(const CaseRecord& record);
CaseRecord case_record_from_json(const ojson& j);

/// Header line (record type "meta") carried by every corpus file.
struct CorpusMeta {
    std::string format{kCorpusFormat};
    std::string generator = "splitmix64";
    std::string generator_version{kGeneratorVersion};
    std::uint64_t seed = 0;
    std::string scenario;  // empty for mixed corpora (the paper fixtures)
    ThresholdConfig thresholds;

    bool operator==(const CorpusMeta&) const = default;
};

struct Corpus {
    CorpusMeta meta;
    std::vector<CaseRecord> records;
};

/// One JSON object per line, meta header first. Byte-deterministic for a
/// given corpus value.
std::string serialize_corpus(const Corpus& corpus);
Corpus parse_corpus(std::istream& in);

void write_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus read_corpus(const std::filesystem::path& path);

}  // namespace diabench::jsonl

#endif  // DIABENCH_JSONL_HPP
