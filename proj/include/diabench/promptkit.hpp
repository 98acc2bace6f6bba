#ifndef DIABENCH_PROMPTKIT_HPP
#define DIABENCH_PROMPTKIT_HPP

#include <array>
#include <filesystem>
#include <map>
#include <string>

#include "diabench/domain.hpp"

namespace diabench::promptkit {

inline constexpr std::string_view kBuiltinTemplateVersion = "v1";

struct PromptBundle {
    std::string system;
    std::string user;
    Scenario scenario = Scenario::labs;
    std::string case_id;

    bool operator==(const PromptBundle&) const = default;
};

/// Frozen prompt templates, one system line and one user template per
/// scenario. The shipped templates/ directory mirrors the built-ins
/// byte-for-byte; --templates <dir> swaps in an alternative set for
/// prompt-sensitivity experiments.
class TemplateSet {
public:
    /// The compiled-in v1 assets.
    static const TemplateSet& builtin();

    /// Loads <scenario>.system.txt and <scenario>.user.txt for all five
    /// scenarios from dir. A single trailing newline per file is trimmed.
    static TemplateSet load_dir(const std::filesystem::path& dir);

    const std::string& system_text(Scenario scenario) const;
    const std::string& user_template(Scenario scenario) const;

    /// "v1" for the built-ins, "custom-<hash>" for a loaded directory.
    const std::string& version() const { return version_; }

private:
    std::array<std::string, 5> system_{};
    std::array<std::string, 5> user_{};
    std::string version_;
};

/// Replaces every "{key}" whose key appears in values; unknown {tokens}
/// (e.g. the literal choice set "{Normal | Prediabetes | Diabetes}") pass
/// through untouched.
std::string substitute(std::string_view text,
                       const std::map<std::string, std::string>& values);

/// Fills the scenario template with the case payload, values formatted the
/// way the source tables print them. Deterministic and injective on payload
/// values within a scenario.
PromptBundle render(const CaseRecord& record,
                    const TemplateSet& templates = TemplateSet::builtin());

/// The task instruction block for a scenario (everything from "Task:" in the
/// user template). Names the JSON summary fields; monitoring adds week and
/// alert_level, gdm asks for the patient education message.
std::string schema_instruction(Scenario scenario,
                               const TemplateSet& templates = TemplateSet::builtin());

/// Bidirectional identifier <-> human phrase table used when rendering
/// prompts ("frequent_urination" <-> "frequent urination").
std::string_view human_phrase(Symptom s);
std::string_view human_phrase(RiskFactor r);
std::string_view human_phrase(LesionFinding f);
std::optional<Symptom> symptom_from_phrase(std::string_view phrase);
std::optional<RiskFactor> risk_factor_from_phrase(std::string_view phrase);
std::optional<LesionFinding> lesion_from_phrase(std::string_view phrase);

}  // namespace diabench::promptkit

#endif  // DIABENCH_PROMPTKIT_HPP
