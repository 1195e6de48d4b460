#pragma once
// Model and result file formats.
//
// Native model format ("voiplan-model 1"): line-oriented text, `#` comments,
// whitespace-separated tokens. A flat model lists sizes, then matrices as
//   transition <a> dense            (|S| rows of |S| values)
//   transition <a> sparse <nnz>     (nnz lines of: row col value)
//   default_observation_model dense (|S| rows of |Omega_e| values)
//   observation_model <a> dense <cols>
//   reward_maintenance dense / reward_observation dense
//   reward_damage                   (one line of |S| values)
//   allowed_pairs <count>           (count lines of: a_m a_o)
// Sizes come first (`states`, `maintenance_actions`, `observation_actions`,
// `default_observations`); name lists are optional. Reward sections default
// to zero and the default channel to uninformative when omitted.
//
// Two builder blocks compile to models on load:
//   factored three_component ... end   (accuracy, setting, default_accuracy)
//   deck ... end                       (full DeckModelSpec, or `synthetic
//                                       <seed>` after the shape fields)
// A `finite_horizon <length> augment` directive wraps a stationary model
// into its time-augmented finite-horizon version.
//
// The writer always emits the flat form with round-trip-exact (%.17g)
// literals; reported numbers elsewhere (CSV, reports) use 9 significant
// digits. All file writes go through a temp file + atomic rename so readers
// never observe partial output.
//
// A converter ingests the widely used plain-text POMDP interchange format
// (discount / values / states / actions / observations / T / O / R stanzas).
// Converted models put the whole action set on the maintenance side, pair
// action i with observation action i (diagonal allowed mask) so
// action-dependent observation models fit the factored scheme, and fold
// state-action-successor-observation rewards into expected maintenance
// rewards. Positive rewards are rejected unless a shift is requested, in
// which case all rewards move down by the global maximum (adding a constant
// max_r/(1-discount) to every value).

#include <cstdint>
#include <string>
#include <vector>

#include "voiplan/bounds.hpp"
#include "voiplan/casestudies.hpp"
#include "voiplan/metrics.hpp"
#include "voiplan/model.hpp"
#include "voiplan/sim.hpp"

namespace voiplan {

// --- native model format ---

// Parses the native format; throws ParseError with a line diagnostic. If
// source_kind is non-null it receives "flat", "factored", or "deck".
PomdpModel parse_model_text(const std::string& text, std::string* source_kind = nullptr);
PomdpModel load_model_file(const std::string& path, std::string* source_kind = nullptr);

std::string write_model_text(const PomdpModel& model);
void save_model_file(const PomdpModel& model, const std::string& path);

// Deck specs serialize as a deck block (plus the setting) in the same format.
std::string write_deck_spec_text(const DeckModelSpec& spec, int setting);

// Generic finite-horizon augmentation: state space times `length` plus one
// absorbing zero-reward terminal; per-slice copies of transitions,
// observation rows, and rewards.
PomdpModel augment_finite_horizon(const PomdpModel& model, std::size_t length);

// --- interchange-format converter ---

// `shift_rewards` permits positive rewards by shifting all rewards down by
// the global maximum; `applied_shift` (optional) receives the shift amount
// (0 when none was needed). Without the flag, positive rewards throw
// ParseError.
PomdpModel parse_cassandra_text(const std::string& text, bool shift_rewards = false,
                                double* applied_shift = nullptr);
PomdpModel load_cassandra_file(const std::string& path, bool shift_rewards = false,
                               double* applied_shift = nullptr);

// --- bounds archive ---

void save_bounds_archive(const ValueBounds& bounds, std::uint64_t config_digest,
                         const std::string& path);
ValueBounds load_bounds_archive(const std::string& path,
                                std::uint64_t* config_digest = nullptr);

// --- text output helpers ---

// 9-significant-digit rendering used for every reported number.
std::string format_g9(double v);

// Writes to <path>.tmp then renames onto path.
void write_text_atomic(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

std::string convergence_csv(const std::vector<ConvergenceRecord>& log);
std::string rollout_csv(const std::string& policy_name, const RolloutResult& r,
                        double truncation_bound);
std::string trace_csv(const PomdpModel& model, const PolicyTrace& trace);
std::string gain_report_csv(const std::string& metric, const GainResult& g);
std::string gain_report_kv(const std::string& metric, const GainResult& g);

}  // namespace voiplan
