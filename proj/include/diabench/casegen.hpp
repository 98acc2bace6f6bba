#ifndef DIABENCH_CASEGEN_HPP
#define DIABENCH_CASEGEN_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "diabench/domain.hpp"
#include "diabench/jsonl.hpp"

namespace diabench::casegen {

/// splitmix64: seedable, platform-independent, documented in the corpus meta
/// header as generator "splitmix64". All sampling is integer/fixed-point so
/// corpora are byte-identical across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [lo, hi], inclusive.
    std::int64_t uniform(std::int64_t lo, std::int64_t hi);

    /// Uniform one-decimal value in [lo_tenths, hi_tenths] / 10.
    double uniform_tenths(std::int64_t lo_tenths, std::int64_t hi_tenths);

private:
    std::uint64_t state_;
};

struct GenSpec {
    Scenario scenario = Scenario::labs;
    std::uint64_t count = 1;
    std::uint64_t seed = 0;
    /// Optional stratum-name -> fraction map; must sum to 1 (+-1e-9) and name
    /// only strata declared for the scenario. Unset means uniform.
    std::map<std::string, double> strata_quotas;
};

/// Declared stratum order per scenario (allocation remainders go to the
/// front of this list).
const std::vector<std::string>& strata_for(Scenario scenario);

/// Classification every case of the stratum adjudicates to.
Label stratum_expected_label(Scenario scenario, const std::string& stratum);

/// count-per-stratum allocation: floor(count * quota), remainder one each to
/// the first strata in declared order.
std::vector<std::uint64_t> allocate_strata(const GenSpec& spec);

GlycemicMarkers sample_labs(Rng& rng, const std::string& stratum);
OgttResult sample_ogtt(Rng& rng, const std::string& stratum);
MonitoringWeek sample_week(Rng& rng, GlycemiaClass profile_stage, int week_index);
SymptomCase sample_symptom_case(Rng& rng, const std::string& stratum);
RetinalCase sample_retinal_case(Rng& rng, const std::string& stratum);

/// Generates exactly spec.count records, each labeled by the oracle.
/// Identical (spec, cfg) yields byte-identical corpora.
std::vector<CaseRecord> generate(const GenSpec& spec, const ThresholdConfig& cfg = {});

/// generate() plus the corpus meta header.
jsonl::Corpus generate_corpus(const GenSpec& spec, const ThresholdConfig& cfg = {});

/// The 13 golden cases from the source tables (4 lab, 3 OGTT, 3 monitoring
/// weeks, 3 retinal), with oracle-attached ground truth.
std::vector<CaseRecord> paper_fixture_corpus();
jsonl::Corpus paper_fixture_corpus_with_meta();

}  // namespace diabench::casegen

#endif  // DIABENCH_CASEGEN_HPP
