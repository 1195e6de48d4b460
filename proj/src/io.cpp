#include "voiplan/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <tuple>
#include <utility>

#include "voiplan/errors.hpp"

namespace voiplan {

namespace {

// ---------------------------------------------------------------------------
// low-level text helpers
// ---------------------------------------------------------------------------

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
    if (line == 0) throw ParseError(msg);
    throw ParseError("line " + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

double to_double(const std::string& tok, std::size_t line) {
    const char* begin = tok.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end != begin + tok.size() || tok.empty())
        fail(line, "expected a number, got '" + tok + "'");
    return v;
}

std::size_t to_size(const std::string& tok, std::size_t line) {
    if (tok.empty() || tok[0] == '-') fail(line, "expected a nonnegative integer, got '" + tok + "'");
    const char* begin = tok.c_str();
    char* end = nullptr;
    const unsigned long long v = std::strtoull(begin, &end, 10);
    if (end != begin + tok.size()) fail(line, "expected an integer, got '" + tok + "'");
    return static_cast<std::size_t>(v);
}

std::uint64_t to_u64(const std::string& tok, std::size_t line) {
    if (tok.empty() || tok[0] == '-') fail(line, "expected a nonnegative integer, got '" + tok + "'");
    const char* begin = tok.c_str();
    char* end = nullptr;
    const unsigned long long v = std::strtoull(begin, &end, 10);
    if (end != begin + tok.size()) fail(line, "expected an integer, got '" + tok + "'");
    return static_cast<std::uint64_t>(v);
}

// Non-empty, comment-stripped lines with their 1-based source numbers.
struct Scanner {
    std::vector<std::pair<std::size_t, std::string>> lines;
    std::size_t pos = 0;

    explicit Scanner(const std::string& text) {
        std::size_t num = 0, start = 0;
        while (start <= text.size()) {
            std::size_t nl = text.find('\n', start);
            if (nl == std::string::npos) nl = text.size();
            ++num;
            std::string line = text.substr(start, nl - start);
            const std::size_t hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = trim(line);
            if (!line.empty()) lines.emplace_back(num, line);
            if (nl == text.size()) break;
            start = nl + 1;
        }
    }

    bool next(std::string& line, std::size_t& num) {
        if (pos >= lines.size()) return false;
        num = lines[pos].first;
        line = lines[pos].second;
        ++pos;
        return true;
    }

    // Next line or a hard error naming what was expected.
    void require(std::string& line, std::size_t& num, const std::string& what) {
        if (!next(line, num)) {
            const std::size_t last = lines.empty() ? 0 : lines.back().first;
            fail(last, "unexpected end of input, expected " + what);
        }
    }
};

std::vector<double> read_value_line(Scanner& sc, std::size_t n, const std::string& what) {
    std::string line;
    std::size_t num = 0;
    sc.require(line, num, what);
    const std::vector<std::string> toks = split_ws(line);
    if (toks.size() != n)
        fail(num, what + ": expected " + std::to_string(n) + " values, got " +
                      std::to_string(toks.size()));
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = to_double(toks[i], num);
    return out;
}

DenseMat read_dense(Scanner& sc, std::size_t rows, std::size_t cols, const std::string& what) {
    DenseMat m(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const std::vector<double> row =
            read_value_line(sc, cols, what + " row " + std::to_string(r));
        std::copy(row.begin(), row.end(), m.row(r));
    }
    return m;
}

std::vector<std::string> read_names(Scanner& sc, std::size_t n, const std::string& what) {
    std::vector<std::string> out;
    out.reserve(n);
    std::string line;
    std::size_t num = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sc.require(line, num, what + " entry " + std::to_string(i));
        out.push_back(line);
    }
    return out;
}

CsrMat csr_from_triples(std::size_t rows, std::size_t cols,
                        std::vector<std::tuple<std::size_t, std::size_t, double>> triples,
                        std::size_t line) {
    std::sort(triples.begin(), triples.end());
    CsrMat m;
    m.rows = rows;
    m.cols = cols;
    m.row_ptr.assign(rows + 1, 0);
    m.col.reserve(triples.size());
    m.val.reserve(triples.size());
    for (std::size_t i = 0; i < triples.size(); ++i) {
        const auto& [r, c, v] = triples[i];
        if (r >= rows || c >= cols) fail(line, "sparse entry index out of range");
        if (i > 0 && std::get<0>(triples[i - 1]) == r && std::get<1>(triples[i - 1]) == c)
            fail(line, "duplicate sparse entry at row " + std::to_string(r) + ", col " +
                           std::to_string(c));
        ++m.row_ptr[r + 1];
        m.col.push_back(static_cast<std::uint32_t>(c));
        m.val.push_back(v);
    }
    for (std::size_t r = 0; r < rows; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
    return m;
}

// ---------------------------------------------------------------------------
// number rendering
// ---------------------------------------------------------------------------

std::string format_g17(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void append_row_g17(std::string& out, const double* v, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (i) out += ' ';
        out += format_g17(v[i]);
    }
    out += '\n';
}

std::string sanitize_csv(const std::string& s) {
    std::string out = s;
    for (char& c : out)
        if (c == ',' || c == '\n' || c == '\r') c = ' ';
    return out;
}

// ---------------------------------------------------------------------------
// native format: builder blocks
// ---------------------------------------------------------------------------

PomdpModel parse_factored_block(Scanner& sc, std::size_t head_line) {
    double accuracy = -1.0;
    double default_accuracy = -1.0;
    bool has_default_accuracy = false;
    int setting = 1;
    std::string line;
    std::size_t num = 0;
    for (;;) {
        sc.require(line, num, "'end' of factored block");
        const std::vector<std::string> toks = split_ws(line);
        if (toks[0] == "end") {
            if (toks.size() != 1) fail(num, "'end' takes no arguments");
            break;
        }
        if (toks[0] == "accuracy" && toks.size() == 2) {
            accuracy = to_double(toks[1], num);
        } else if (toks[0] == "setting" && toks.size() == 2) {
            setting = static_cast<int>(to_size(toks[1], num));
        } else if (toks[0] == "default_accuracy" && toks.size() == 2) {
            default_accuracy = to_double(toks[1], num);
            has_default_accuracy = true;
        } else {
            fail(num, "unknown factored-block directive '" + toks[0] + "'");
        }
    }
    if (accuracy < 0.0) fail(head_line, "factored block needs an 'accuracy' line");
    PomdpModel m = build_three_component(accuracy, setting);
    if (has_default_accuracy) m = with_condition_default_channel(std::move(m), default_accuracy);
    return m;
}

PomdpModel parse_deck_block(Scanner& sc, std::size_t head_line) {
    DeckModelSpec spec;
    DeckShape shape;
    bool synthetic = false;
    std::uint64_t seed = 0;
    int setting = 1;
    bool explicit_data = false;  // any hand-given matrix or cost table
    bool saw_conditions = false, saw_rates = false, saw_horizon = false;

    std::string line;
    std::size_t num = 0;
    for (;;) {
        sc.require(line, num, "'end' of deck block");
        std::vector<std::string> toks = split_ws(line);
        const std::string& key = toks[0];
        if (key == "end") {
            if (toks.size() != 1) fail(num, "'end' takes no arguments");
            break;
        }
        auto one_size = [&](std::size_t& dst, bool& flag) {
            if (toks.size() != 2) fail(num, "'" + key + "' takes one integer");
            dst = to_size(toks[1], num);
            flag = true;
        };
        auto one_double = [&](double& dst) {
            if (toks.size() != 2) fail(num, "'" + key + "' takes one number");
            dst = to_double(toks[1], num);
        };
        auto dense_section = [&](DenseMat& dst, std::size_t rows, std::size_t cols) {
            if (toks.size() != 2 || toks[1] != "dense")
                fail(num, "'" + key + "' expects the form '" + key + " dense'");
            if (rows == 0 || cols == 0)
                fail(num, "'" + key + "' needs conditions/rates declared first");
            dst = read_dense(sc, rows, cols, key);
            explicit_data = true;
        };
        auto cost_vector = [&](std::vector<double>& dst) {
            if (toks.size() != 1 + spec.condition_count)
                fail(num, "'" + key + "' takes " + std::to_string(spec.condition_count) +
                              " values");
            dst.resize(spec.condition_count);
            for (std::size_t i = 0; i < spec.condition_count; ++i)
                dst[i] = to_double(toks[1 + i], num);
            explicit_data = true;
        };
        auto triple = [&](std::array<double, 3>& dst) {
            if (toks.size() != 4) fail(num, "'" + key + "' takes three values");
            for (std::size_t i = 0; i < 3; ++i) dst[i] = to_double(toks[1 + i], num);
        };

        if (key == "conditions") {
            one_size(spec.condition_count, saw_conditions);
        } else if (key == "rates") {
            one_size(spec.rate_count, saw_rates);
            shape.rate_count = spec.rate_count;
        } else if (key == "horizon") {
            one_size(spec.horizon, saw_horizon);
            shape.horizon = spec.horizon;
        } else if (key == "setting") {
            if (toks.size() != 2) fail(num, "'setting' takes one integer");
            setting = static_cast<int>(to_size(toks[1], num));
        } else if (key == "discount") {
            one_double(spec.discount);
        } else if (key == "synthetic") {
            if (toks.size() != 2) fail(num, "'synthetic' takes one seed");
            seed = to_u64(toks[1], num);
            synthetic = true;
        } else if (key == "advance_start") {
            triple(shape.advance_start);
        } else if (key == "advance_end") {
            triple(shape.advance_end);
        } else if (key == "jitter") {
            one_double(shape.jitter);
        } else if (key == "stay") {
            dense_section(spec.stay, spec.rate_count, spec.condition_count);
        } else if (key == "advance") {
            dense_section(spec.advance, spec.rate_count, spec.condition_count);
        } else if (key == "minor_block") {
            dense_section(spec.minor_block, spec.condition_count, spec.condition_count);
        } else if (key == "major_block") {
            dense_section(spec.major_block, spec.condition_count, spec.condition_count);
        } else if (key == "visual_obs") {
            dense_section(spec.visual_obs, spec.condition_count, spec.condition_count);
        } else if (key == "monitor_obs") {
            dense_section(spec.monitor_obs, spec.condition_count, spec.condition_count);
        } else if (key == "minor_cost") {
            cost_vector(spec.minor_cost);
        } else if (key == "major_cost") {
            cost_vector(spec.major_cost);
        } else if (key == "replace_cost") {
            cost_vector(spec.replace_cost);
        } else if (key == "damage_cost") {
            cost_vector(spec.damage_cost);
        } else if (key == "visual_cost") {
            one_double(spec.visual_cost);
            explicit_data = true;
        } else if (key == "monitor_cost") {
            one_double(spec.monitor_cost);
            explicit_data = true;
        } else {
            fail(num, "unknown deck-block directive '" + key + "'");
        }
    }

    if (synthetic) {
        if (explicit_data)
            fail(head_line, "deck block mixes 'synthetic' with explicit matrices or costs");
        if (saw_conditions && spec.condition_count != 4)
            fail(head_line, "synthetic deck data is generated for 4 condition levels");
        DeckModelSpec synth = synth_deck_spec(seed, shape);
        return build_deck_model(synth, setting);
    }
    if (!saw_conditions || !saw_rates || !saw_horizon)
        fail(head_line, "deck block needs 'conditions', 'rates', and 'horizon'");
    auto need = [&](bool ok, const char* what) {
        if (!ok) fail(head_line, std::string("deck block is missing '") + what + "'");
    };
    need(spec.stay.rows != 0, "stay");
    need(spec.advance.rows != 0, "advance");
    need(spec.minor_block.rows != 0, "minor_block");
    need(spec.major_block.rows != 0, "major_block");
    need(spec.visual_obs.rows != 0, "visual_obs");
    need(spec.monitor_obs.rows != 0, "monitor_obs");
    need(!spec.minor_cost.empty(), "minor_cost");
    need(!spec.major_cost.empty(), "major_cost");
    need(!spec.replace_cost.empty(), "replace_cost");
    need(!spec.damage_cost.empty(), "damage_cost");
    return build_deck_model(spec, setting);
}

}  // namespace

// ---------------------------------------------------------------------------
// native format: parser
// ---------------------------------------------------------------------------

PomdpModel parse_model_text(const std::string& text, std::string* source_kind) {
    Scanner sc(text);
    std::string line;
    std::size_t num = 0;
    sc.require(line, num, "'voiplan-model 1' header");
    {
        const std::vector<std::string> toks = split_ws(line);
        if (toks.size() != 2 || toks[0] != "voiplan-model" || toks[1] != "1")
            fail(num, "expected 'voiplan-model 1' header");
    }

    PomdpModel m;
    std::string kind = "flat";
    bool built = false;  // a builder block produced the model
    std::size_t S = 0, M = 0, O = 0, E = 0;
    bool saw_default_obs = false, saw_reward_maint = false, saw_reward_obs = false;
    bool saw_reward_damage = false, saw_discount = false;
    std::vector<bool> saw_transition, saw_obs_model;
    std::size_t fh_length = 0;
    bool fh_requested = false;

    auto need_sizes = [&](bool states, bool maint, bool obs, bool defaults) {
        if (states && S == 0) fail(num, "'states' must be declared first");
        if (maint && M == 0) fail(num, "'maintenance_actions' must be declared first");
        if (obs && O == 0) fail(num, "'observation_actions' must be declared first");
        if (defaults && E == 0) fail(num, "'default_observations' must be declared first");
    };
    auto flat_only = [&](const std::string& key) {
        if (built) fail(num, "'" + key + "' cannot follow a builder block");
    };

    while (sc.next(line, num)) {
        std::vector<std::string> toks = split_ws(line);
        const std::string& key = toks[0];

        if (key == "factored") {
            if (built || S != 0) fail(num, "builder block must be the only model content");
            if (toks.size() != 2 || toks[1] != "three_component")
                fail(num, "unknown factored family; expected 'factored three_component'");
            m = parse_factored_block(sc, num);
            kind = "factored";
            built = true;
        } else if (key == "deck") {
            if (built || S != 0) fail(num, "builder block must be the only model content");
            if (toks.size() != 1) fail(num, "'deck' starts a block and takes no arguments");
            m = parse_deck_block(sc, num);
            kind = "deck";
            built = true;
        } else if (key == "finite_horizon") {
            if (toks.size() != 3 || toks[2] != "augment")
                fail(num, "expected 'finite_horizon <length> augment'");
            fh_length = to_size(toks[1], num);
            if (fh_length == 0) fail(num, "finite horizon length must be positive");
            fh_requested = true;
        } else if (key == "discount") {
            flat_only(key);
            if (toks.size() != 2) fail(num, "'discount' takes one number");
            m.discount = to_double(toks[1], num);
            saw_discount = true;
        } else if (key == "initial_state") {
            flat_only(key);
            if (toks.size() != 2) fail(num, "'initial_state' takes one integer");
            m.initial_state = to_size(toks[1], num);
        } else if (key == "initial_belief") {
            flat_only(key);
            need_sizes(true, false, false, false);
            if (toks.size() != 1) fail(num, "'initial_belief' values go on the next line");
            m.initial_belief_probs = read_value_line(sc, S, "initial_belief");
        } else if (key == "states") {
            flat_only(key);
            if (toks.size() != 2) fail(num, "'states' takes one integer");
            if (S != 0) fail(num, "'states' declared twice");
            S = to_size(toks[1], num);
            if (S == 0) fail(num, "state count must be positive");
            m.state_names.resize(S);
            for (std::size_t i = 0; i < S; ++i) m.state_names[i] = "s" + std::to_string(i);
        } else if (key == "maintenance_actions") {
            flat_only(key);
            if (toks.size() != 2) fail(num, "'maintenance_actions' takes one integer");
            if (M != 0) fail(num, "'maintenance_actions' declared twice");
            M = to_size(toks[1], num);
            if (M == 0) fail(num, "maintenance action count must be positive");
            m.maint_names.resize(M);
            for (std::size_t i = 0; i < M; ++i) m.maint_names[i] = "m" + std::to_string(i);
            saw_transition.assign(M, false);
        } else if (key == "observation_actions") {
            flat_only(key);
            if (toks.size() != 2) fail(num, "'observation_actions' takes one integer");
            if (O != 0) fail(num, "'observation_actions' declared twice");
            O = to_size(toks[1], num);
            if (O == 0) fail(num, "observation action count must be positive");
            m.obs_action_names.resize(O);
            for (std::size_t i = 0; i < O; ++i) m.obs_action_names[i] = "o" + std::to_string(i);
            saw_obs_model.assign(O, false);
        } else if (key == "default_observations") {
            flat_only(key);
            if (toks.size() != 2) fail(num, "'default_observations' takes one integer");
            E = to_size(toks[1], num);
            if (E == 0) fail(num, "default observation count must be positive");
        } else if (key == "state_names") {
            flat_only(key);
            need_sizes(true, false, false, false);
            m.state_names = read_names(sc, S, "state_names");
        } else if (key == "maintenance_action_names") {
            flat_only(key);
            need_sizes(false, true, false, false);
            m.maint_names = read_names(sc, M, "maintenance_action_names");
        } else if (key == "observation_action_names") {
            flat_only(key);
            need_sizes(false, false, true, false);
            m.obs_action_names = read_names(sc, O, "observation_action_names");
        } else if (key == "transition") {
            flat_only(key);
            need_sizes(true, true, false, false);
            if (toks.size() < 3) fail(num, "expected 'transition <a> dense|sparse ...'");
            const std::size_t a = to_size(toks[1], num);
            if (a >= M) fail(num, "transition action index out of range");
            if (saw_transition[a]) fail(num, "transition " + std::to_string(a) + " declared twice");
            if (m.transition.size() != M) m.transition.resize(M);
            if (toks[2] == "dense") {
                if (toks.size() != 3) fail(num, "'transition <a> dense' takes no more arguments");
                m.transition[a] = TransMat::from_dense(read_dense(sc, S, S, "transition"));
            } else if (toks[2] == "sparse") {
                if (toks.size() != 4) fail(num, "expected 'transition <a> sparse <nnz>'");
                const std::size_t nnz = to_size(toks[3], num);
                std::vector<std::tuple<std::size_t, std::size_t, double>> triples;
                triples.reserve(nnz);
                for (std::size_t i = 0; i < nnz; ++i) {
                    std::string tline;
                    std::size_t tnum = 0;
                    sc.require(tline, tnum, "sparse transition entry");
                    const std::vector<std::string> t = split_ws(tline);
                    if (t.size() != 3) fail(tnum, "sparse entry needs 'row col value'");
                    triples.emplace_back(to_size(t[0], tnum), to_size(t[1], tnum),
                                         to_double(t[2], tnum));
                }
                m.transition[a] = TransMat::from_csr(csr_from_triples(S, S, std::move(triples), num));
            } else {
                fail(num, "transition storage must be 'dense' or 'sparse'");
            }
            saw_transition[a] = true;
        } else if (key == "default_observation_model") {
            flat_only(key);
            need_sizes(true, false, false, true);
            if (toks.size() != 2 || toks[1] != "dense")
                fail(num, "expected 'default_observation_model dense'");
            m.default_obs = read_dense(sc, S, E, "default_observation_model");
            saw_default_obs = true;
        } else if (key == "observation_model") {
            flat_only(key);
            need_sizes(true, false, true, false);
            if (toks.size() != 4 || toks[2] != "dense")
                fail(num, "expected 'observation_model <a> dense <cols>'");
            const std::size_t a = to_size(toks[1], num);
            if (a >= O) fail(num, "observation action index out of range");
            if (saw_obs_model[a])
                fail(num, "observation_model " + std::to_string(a) + " declared twice");
            const std::size_t cols = to_size(toks[3], num);
            if (cols == 0) fail(num, "observation outcome count must be positive");
            if (m.obs_model.size() != O) m.obs_model.resize(O);
            m.obs_model[a] = read_dense(sc, S, cols, "observation_model");
            saw_obs_model[a] = true;
        } else if (key == "reward_maintenance") {
            flat_only(key);
            need_sizes(true, true, false, false);
            if (toks.size() != 2 || toks[1] != "dense")
                fail(num, "expected 'reward_maintenance dense'");
            m.reward_maint = read_dense(sc, S, M, "reward_maintenance");
            saw_reward_maint = true;
        } else if (key == "reward_observation") {
            flat_only(key);
            need_sizes(true, false, true, false);
            if (toks.size() != 2 || toks[1] != "dense")
                fail(num, "expected 'reward_observation dense'");
            m.reward_obs = read_dense(sc, S, O, "reward_observation");
            saw_reward_obs = true;
        } else if (key == "reward_damage") {
            flat_only(key);
            need_sizes(true, false, false, false);
            if (toks.size() != 1) fail(num, "'reward_damage' values go on the next line");
            m.reward_damage = read_value_line(sc, S, "reward_damage");
            saw_reward_damage = true;
        } else if (key == "allowed_pairs") {
            flat_only(key);
            need_sizes(false, true, true, false);
            if (toks.size() != 2) fail(num, "expected 'allowed_pairs <count>'");
            const std::size_t count = to_size(toks[1], num);
            if (count == 0) fail(num, "allowed_pairs count must be positive");
            m.allowed_mask.assign(M * O, 0);
            for (std::size_t i = 0; i < count; ++i) {
                std::string pline;
                std::size_t pnum = 0;
                sc.require(pline, pnum, "allowed pair");
                const std::vector<std::string> t = split_ws(pline);
                if (t.size() != 2) fail(pnum, "allowed pair needs 'a_m a_o'");
                const std::size_t am = to_size(t[0], pnum), ao = to_size(t[1], pnum);
                if (am >= M || ao >= O) fail(pnum, "allowed pair index out of range");
                m.allowed_mask[am * O + ao] = 1;
            }
        } else {
            fail(num, "unknown directive '" + key + "'");
        }
    }

    if (!built) {
        if (S == 0) fail(0, "model has no 'states' declaration and no builder block");
        if (M == 0) fail(0, "model has no 'maintenance_actions' declaration");
        if (O == 0) fail(0, "model has no 'observation_actions' declaration");
        if (!saw_discount) fail(0, "model has no 'discount' declaration");
        for (std::size_t a = 0; a < M; ++a)
            if (!saw_transition[a])
                fail(0, "transition matrix for maintenance action " + std::to_string(a) +
                            " is missing");
        if (!saw_default_obs) {
            m.default_obs = DenseMat(S, 1, 1.0);  // uninformative
        }
        if (m.obs_model.size() != O) m.obs_model.resize(O);
        for (std::size_t a = 0; a < O; ++a)
            if (!saw_obs_model[a]) m.obs_model[a] = DenseMat(S, 1, 1.0);
        if (!saw_reward_maint) m.reward_maint = DenseMat(S, M, 0.0);
        if (!saw_reward_obs) m.reward_obs = DenseMat(S, O, 0.0);
        if (!saw_reward_damage) m.reward_damage.assign(S, 0.0);
        m.finalize();
        m.validate();
    }

    if (fh_requested) {
        if (kind == "deck")
            fail(0, "finite_horizon augmentation does not apply to deck models (already "
                    "time-indexed)");
        m = augment_finite_horizon(m, fh_length);
    }
    if (source_kind) *source_kind = kind;
    return m;
}

PomdpModel load_model_file(const std::string& path, std::string* source_kind) {
    try {
        return parse_model_text(read_text_file(path), source_kind);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// native format: writer
// ---------------------------------------------------------------------------

std::string write_model_text(const PomdpModel& model) {
    const std::size_t S = model.num_states();
    const std::size_t M = model.num_maint();
    const std::size_t O = model.num_obs_actions();
    std::string out;
    out.reserve(1 << 16);
    out += "voiplan-model 1\n";
    out += "discount " + format_g17(model.discount) + "\n";
    out += "initial_state " + std::to_string(model.initial_state) + "\n";
    out += "states " + std::to_string(S) + "\n";
    out += "maintenance_actions " + std::to_string(M) + "\n";
    out += "observation_actions " + std::to_string(O) + "\n";
    out += "default_observations " + std::to_string(model.num_default_obs()) + "\n";
    out += "state_names\n";
    for (const std::string& n : model.state_names) out += n + "\n";
    out += "maintenance_action_names\n";
    for (const std::string& n : model.maint_names) out += n + "\n";
    out += "observation_action_names\n";
    for (const std::string& n : model.obs_action_names) out += n + "\n";
    if (!model.initial_belief_probs.empty()) {
        out += "initial_belief\n";
        append_row_g17(out, model.initial_belief_probs.data(), S);
    }
    for (std::size_t a = 0; a < M; ++a) {
        const TransMat& t = model.transition[a];
        if (const CsrMat* c = t.csr_store()) {
            out += "transition " + std::to_string(a) + " sparse " +
                   std::to_string(c->val.size()) + "\n";
            for (std::size_t r = 0; r < c->rows; ++r)
                for (std::size_t k = c->row_ptr[r]; k < c->row_ptr[r + 1]; ++k)
                    out += std::to_string(r) + " " + std::to_string(c->col[k]) + " " +
                           format_g17(c->val[k]) + "\n";
        } else {
            const DenseMat* d = t.dense_store();
            out += "transition " + std::to_string(a) + " dense\n";
            for (std::size_t r = 0; r < d->rows; ++r) append_row_g17(out, d->row(r), d->cols);
        }
    }
    out += "default_observation_model dense\n";
    for (std::size_t r = 0; r < S; ++r)
        append_row_g17(out, model.default_obs.row(r), model.default_obs.cols);
    for (std::size_t a = 0; a < O; ++a) {
        const DenseMat& om = model.obs_model[a];
        out += "observation_model " + std::to_string(a) + " dense " + std::to_string(om.cols) +
               "\n";
        for (std::size_t r = 0; r < S; ++r) append_row_g17(out, om.row(r), om.cols);
    }
    out += "reward_maintenance dense\n";
    for (std::size_t r = 0; r < S; ++r) append_row_g17(out, model.reward_maint.row(r), M);
    out += "reward_observation dense\n";
    for (std::size_t r = 0; r < S; ++r) append_row_g17(out, model.reward_obs.row(r), O);
    out += "reward_damage\n";
    append_row_g17(out, model.reward_damage.data(), S);
    if (!model.allowed_mask.empty()) {
        std::size_t count = 0;
        for (std::uint8_t b : model.allowed_mask) count += (b != 0);
        out += "allowed_pairs " + std::to_string(count) + "\n";
        for (std::size_t am = 0; am < M; ++am)
            for (std::size_t ao = 0; ao < O; ++ao)
                if (model.allowed_mask[am * O + ao])
                    out += std::to_string(am) + " " + std::to_string(ao) + "\n";
    }
    return out;
}

void save_model_file(const PomdpModel& model, const std::string& path) {
    write_text_atomic(path, write_model_text(model));
}

std::string write_deck_spec_text(const DeckModelSpec& spec, int setting) {
    std::string out;
    out.reserve(1 << 14);
    out += "voiplan-model 1\n";
    out += "deck\n";
    out += "conditions " + std::to_string(spec.condition_count) + "\n";
    out += "rates " + std::to_string(spec.rate_count) + "\n";
    out += "horizon " + std::to_string(spec.horizon) + "\n";
    out += "discount " + format_g17(spec.discount) + "\n";
    out += "setting " + std::to_string(setting) + "\n";
    auto dense = [&](const char* key, const DenseMat& m) {
        out += std::string(key) + " dense\n";
        for (std::size_t r = 0; r < m.rows; ++r) append_row_g17(out, m.row(r), m.cols);
    };
    auto costs = [&](const char* key, const std::vector<double>& v) {
        out += key;
        for (double x : v) out += " " + format_g17(x);
        out += "\n";
    };
    dense("stay", spec.stay);
    dense("advance", spec.advance);
    dense("minor_block", spec.minor_block);
    dense("major_block", spec.major_block);
    dense("visual_obs", spec.visual_obs);
    dense("monitor_obs", spec.monitor_obs);
    costs("minor_cost", spec.minor_cost);
    costs("major_cost", spec.major_cost);
    costs("replace_cost", spec.replace_cost);
    costs("damage_cost", spec.damage_cost);
    out += "visual_cost " + format_g17(spec.visual_cost) + "\n";
    out += "monitor_cost " + format_g17(spec.monitor_cost) + "\n";
    out += "end\n";
    return out;
}

// ---------------------------------------------------------------------------
// finite-horizon augmentation
// ---------------------------------------------------------------------------

namespace {

template <typename F>
void for_each_entry(const TransMat& t, std::size_t row, F f) {
    if (const CsrMat* c = t.csr_store()) {
        for (std::size_t k = c->row_ptr[row]; k < c->row_ptr[row + 1]; ++k)
            f(static_cast<std::size_t>(c->col[k]), c->val[k]);
    } else {
        const DenseMat* d = t.dense_store();
        const double* r = d->row(row);
        for (std::size_t j = 0; j < d->cols; ++j)
            if (r[j] != 0.0) f(j, r[j]);
    }
}

}  // namespace

PomdpModel augment_finite_horizon(const PomdpModel& model, std::size_t length) {
    if (length == 0) throw SpecInvariantViolation("finite horizon length must be positive");
    const std::size_t S = model.num_states();
    const std::size_t M = model.num_maint();
    const std::size_t O = model.num_obs_actions();
    const std::size_t S2 = S * length + 1;
    const std::size_t terminal = S * length;

    PomdpModel out;
    out.discount = model.discount;
    out.maint_names = model.maint_names;
    out.obs_action_names = model.obs_action_names;
    out.allowed_mask = model.allowed_mask;

    out.state_names.resize(S2);
    for (std::size_t t = 0; t < length; ++t)
        for (std::size_t s = 0; s < S; ++s)
            out.state_names[t * S + s] = "t" + std::to_string(t) + ":" + model.state_names[s];
    out.state_names[terminal] = "end";

    out.transition.resize(M);
    for (std::size_t a = 0; a < M; ++a) {
        CsrMat c;
        c.rows = S2;
        c.cols = S2;
        c.row_ptr.assign(S2 + 1, 0);
        // count then fill
        std::size_t nnz = 0;
        if (const CsrMat* src = model.transition[a].csr_store()) {
            nnz = (length > 1) ? (length - 1) * src->val.size() : 0;
        } else {
            const DenseMat* d = model.transition[a].dense_store();
            std::size_t per = 0;
            for (double v : d->a) per += (v != 0.0);
            nnz = (length > 1) ? (length - 1) * per : 0;
        }
        nnz += S + 1;  // last-slice rows and the terminal row
        c.col.reserve(nnz);
        c.val.reserve(nnz);
        for (std::size_t t = 0; t < length; ++t) {
            for (std::size_t s = 0; s < S; ++s) {
                const std::size_t row = t * S + s;
                if (t + 1 < length) {
                    const std::size_t base = (t + 1) * S;
                    for_each_entry(model.transition[a], s, [&](std::size_t s2, double v) {
                        c.col.push_back(static_cast<std::uint32_t>(base + s2));
                        c.val.push_back(v);
                    });
                } else {
                    c.col.push_back(static_cast<std::uint32_t>(terminal));
                    c.val.push_back(1.0);
                }
                c.row_ptr[row + 1] = c.col.size();
            }
        }
        c.col.push_back(static_cast<std::uint32_t>(terminal));
        c.val.push_back(1.0);
        c.row_ptr[terminal + 1] = c.col.size();
        out.transition[a] = TransMat::from_csr(std::move(c));
    }

    const std::size_t E = model.num_default_obs();
    out.default_obs = DenseMat(S2, E, 0.0);
    for (std::size_t t = 0; t < length; ++t)
        for (std::size_t s = 0; s < S; ++s)
            std::copy(model.default_obs.row(s), model.default_obs.row(s) + E,
                      out.default_obs.row(t * S + s));
    out.default_obs.at(terminal, 0) = 1.0;

    out.obs_model.resize(O);
    for (std::size_t a = 0; a < O; ++a) {
        const DenseMat& src = model.obs_model[a];
        DenseMat dst(S2, src.cols, 0.0);
        for (std::size_t t = 0; t < length; ++t)
            for (std::size_t s = 0; s < S; ++s)
                std::copy(src.row(s), src.row(s) + src.cols, dst.row(t * S + s));
        dst.at(terminal, 0) = 1.0;
        out.obs_model[a] = std::move(dst);
    }

    out.reward_maint = DenseMat(S2, M, 0.0);
    out.reward_obs = DenseMat(S2, O, 0.0);
    out.reward_damage.assign(S2, 0.0);
    for (std::size_t t = 0; t < length; ++t) {
        for (std::size_t s = 0; s < S; ++s) {
            const std::size_t row = t * S + s;
            std::copy(model.reward_maint.row(s), model.reward_maint.row(s) + M,
                      out.reward_maint.row(row));
            std::copy(model.reward_obs.row(s), model.reward_obs.row(s) + O,
                      out.reward_obs.row(row));
            out.reward_damage[row] = model.reward_damage[s];
        }
    }

    out.initial_state = model.initial_state;  // slice 0 shares state indexing
    if (!model.initial_belief_probs.empty()) {
        out.initial_belief_probs.assign(S2, 0.0);
        std::copy(model.initial_belief_probs.begin(), model.initial_belief_probs.end(),
                  out.initial_belief_probs.begin());
    }

    out.finalize();
    out.validate();
    return out;
}

// ---------------------------------------------------------------------------
// interchange-format converter
// ---------------------------------------------------------------------------

namespace {

struct CToken {
    std::string s;
    std::size_t line;
};

std::vector<CToken> ctokenize(const std::string& text) {
    std::vector<CToken> out;
    std::size_t line = 1;
    std::string cur;
    auto flush = [&]() {
        if (!cur.empty()) {
            out.push_back({cur, line});
            cur.clear();
        }
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char ch = text[i];
        if (ch == '#') {
            flush();
            while (i < text.size() && text[i] != '\n') ++i;
            ++line;
            continue;
        }
        if (ch == '\n') {
            flush();
            ++line;
        } else if (std::isspace(static_cast<unsigned char>(ch))) {
            flush();
        } else if (ch == ':') {
            flush();
            out.push_back({":", line});
        } else {
            cur += ch;
        }
    }
    flush();
    return out;
}

struct CParser {
    std::vector<CToken> toks;
    std::size_t pos = 0;

    bool at_end() const { return pos >= toks.size(); }
    const CToken& peek() const {
        if (at_end()) throw ParseError("unexpected end of input");
        return toks[pos];
    }
    CToken get() {
        CToken t = peek();
        ++pos;
        return t;
    }
    bool accept(const char* s) {
        if (!at_end() && toks[pos].s == s) {
            ++pos;
            return true;
        }
        return false;
    }
    void expect_colon(const char* after) {
        if (!accept(":")) {
            const std::size_t ln = at_end() ? 0 : peek().line;
            fail(ln, std::string("expected ':' after '") + after + "'");
        }
    }

    // Is token i the start of a stanza (keyword followed by ':')?
    bool stanza_at(std::size_t i) const {
        if (i + 1 >= toks.size() || toks[i + 1].s != ":") {
            // `start include:` / `start exclude:` take two words
            if (i + 2 < toks.size() && toks[i].s == "start" &&
                (toks[i + 1].s == "include" || toks[i + 1].s == "exclude") &&
                toks[i + 2].s == ":")
                return true;
            return false;
        }
        const std::string& s = toks[i].s;
        return s == "discount" || s == "values" || s == "states" || s == "actions" ||
               s == "observations" || s == "start" || s == "T" || s == "O" || s == "R";
    }

    // Tokens until the next stanza head (for name lists / start lines).
    std::vector<CToken> until_stanza() {
        std::vector<CToken> out;
        while (!at_end() && !stanza_at(pos)) out.push_back(get());
        return out;
    }
};

std::size_t lookup_spec(const CToken& tok, const std::vector<std::string>& names,
                        const char* what) {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i] == tok.s) return i;
    // fall back to a numeric index
    const char* begin = tok.s.c_str();
    char* end = nullptr;
    const unsigned long long v = std::strtoull(begin, &end, 10);
    if (end == begin + tok.s.size() && !tok.s.empty() && v < names.size())
        return static_cast<std::size_t>(v);
    fail(tok.line, std::string("unknown ") + what + " '" + tok.s + "'");
}

std::vector<std::size_t> parse_spec(const CToken& tok, const std::vector<std::string>& names,
                                    const char* what) {
    if (tok.s == "*") {
        std::vector<std::size_t> all(names.size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        return all;
    }
    return {lookup_spec(tok, names, what)};
}

double cnum(CParser& p, const char* what) {
    const CToken t = p.get();
    const char* begin = t.s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end != begin + t.s.size() || t.s.empty())
        fail(t.line, std::string("expected a number for ") + what + ", got '" + t.s + "'");
    return v;
}

void read_names_or_count(CParser& p, std::vector<std::string>& names, char prefix,
                         const char* what) {
    const std::vector<CToken> toks = p.until_stanza();
    if (toks.empty()) fail(0, std::string(what) + " list is empty");
    if (toks.size() == 1) {
        const std::string& s = toks[0].s;
        bool all_digits = !s.empty();
        for (char c : s)
            if (!std::isdigit(static_cast<unsigned char>(c))) all_digits = false;
        if (all_digits) {
            const std::size_t n = to_size(s, toks[0].line);
            if (n == 0) fail(toks[0].line, std::string(what) + " count must be positive");
            names.resize(n);
            for (std::size_t i = 0; i < n; ++i) names[i] = std::string(1, prefix) + std::to_string(i);
            return;
        }
    }
    names.clear();
    for (const CToken& t : toks) names.push_back(t.s);
}

// Reads a dense block of rows*cols numbers, or the keywords uniform/identity.
DenseMat read_cmatrix(CParser& p, std::size_t rows, std::size_t cols, const char* what) {
    const CToken& head = p.peek();
    if (head.s == "uniform") {
        p.get();
        return DenseMat(rows, cols, 1.0 / static_cast<double>(cols));
    }
    if (head.s == "identity") {
        p.get();
        if (rows != cols) fail(head.line, "'identity' needs a square matrix");
        DenseMat m(rows, cols, 0.0);
        for (std::size_t i = 0; i < rows; ++i) m.at(i, i) = 1.0;
        return m;
    }
    DenseMat m(rows, cols, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) m.at(r, c) = cnum(p, what);
    return m;
}

void normalize_rows_or_fail(DenseMat& m, const char* what, const std::string& which) {
    for (std::size_t r = 0; r < m.rows; ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < m.cols; ++c) sum += m.at(r, c);
        if (std::abs(sum - 1.0) > 1e-6)
            throw ParseError(std::string(what) + " row " + std::to_string(r) + " of " + which +
                             " sums to " + format_g9(sum) + ", not 1");
        for (std::size_t c = 0; c < m.cols; ++c) m.at(r, c) /= sum;
    }
}

}  // namespace

PomdpModel parse_cassandra_text(const std::string& text, bool shift_rewards,
                                double* applied_shift) {
    CParser p{ctokenize(text), 0};

    std::vector<std::string> states, actions, observations;
    double discount = -1.0;
    bool cost_values = false;
    bool saw_values = false;
    std::vector<DenseMat> trans, obs;             // per action
    std::vector<std::vector<double>> reward;      // per action: S*S*Omega
    bool start_seen = false;
    std::vector<double> start_belief;             // empty: point mass
    std::size_t start_state = 0;

    auto need_decls = [&](std::size_t line) {
        if (states.empty() || actions.empty() || observations.empty())
            fail(line, "states, actions, and observations must be declared before T/O/R/start");
        if (trans.empty()) {
            const std::size_t S = states.size(), A = actions.size(), Z = observations.size();
            if (S * S * Z * A > 50000000)
                fail(line, "interchange model too large to densify");
            trans.assign(A, DenseMat(S, S, 0.0));
            obs.assign(A, DenseMat(S, Z, 0.0));
            reward.assign(A, std::vector<double>(S * S * Z, 0.0));
        }
    };

    while (!p.at_end()) {
        const CToken head = p.get();
        if (head.s == "discount") {
            p.expect_colon("discount");
            discount = cnum(p, "discount");
        } else if (head.s == "values") {
            p.expect_colon("values");
            const CToken v = p.get();
            if (v.s == "cost")
                cost_values = true;
            else if (v.s == "reward")
                cost_values = false;
            else
                fail(v.line, "values must be 'reward' or 'cost'");
            saw_values = true;
        } else if (head.s == "states") {
            p.expect_colon("states");
            read_names_or_count(p, states, 's', "states");
        } else if (head.s == "actions") {
            p.expect_colon("actions");
            read_names_or_count(p, actions, 'a', "actions");
        } else if (head.s == "observations") {
            p.expect_colon("observations");
            read_names_or_count(p, observations, 'z', "observations");
        } else if (head.s == "start") {
            if (!p.at_end() && (p.peek().s == "include" || p.peek().s == "exclude"))
                fail(p.peek().line, "start include/exclude lists are not supported");
            p.expect_colon("start");
            need_decls(head.line);
            const std::vector<CToken> toks = p.until_stanza();
            if (toks.empty()) fail(head.line, "empty start distribution");
            start_seen = true;
            if (toks.size() == 1 && toks[0].s == "uniform") {
                start_belief.assign(states.size(), 1.0 / static_cast<double>(states.size()));
            } else if (toks.size() == states.size() && states.size() > 1) {
                start_belief.resize(states.size());
                double sum = 0.0;
                for (std::size_t i = 0; i < toks.size(); ++i) {
                    start_belief[i] = to_double(toks[i].s, toks[i].line);
                    sum += start_belief[i];
                }
                if (std::abs(sum - 1.0) > 1e-6)
                    fail(toks[0].line, "start distribution sums to " + format_g9(sum));
                for (double& v : start_belief) v /= sum;
            } else if (toks.size() == 1) {
                start_state = lookup_spec(toks[0], states, "state");
                start_belief.clear();
            } else {
                fail(toks[0].line, "start needs 'uniform', one state, or a full distribution");
            }
        } else if (head.s == "T") {
            p.expect_colon("T");
            need_decls(head.line);
            const std::vector<std::size_t> as = parse_spec(p.get(), actions, "action");
            if (p.accept(":")) {
                const std::vector<std::size_t> ss = parse_spec(p.get(), states, "state");
                if (p.accept(":")) {
                    const std::vector<std::size_t> s2s = parse_spec(p.get(), states, "state");
                    const double v = cnum(p, "transition probability");
                    for (std::size_t a : as)
                        for (std::size_t s : ss)
                            for (std::size_t s2 : s2s) trans[a].at(s, s2) = v;
                } else {
                    std::vector<double> row(states.size());
                    for (double& v : row) v = cnum(p, "transition row");
                    for (std::size_t a : as)
                        for (std::size_t s : ss)
                            std::copy(row.begin(), row.end(), trans[a].row(s));
                }
            } else {
                const DenseMat m =
                    read_cmatrix(p, states.size(), states.size(), "transition matrix");
                for (std::size_t a : as) trans[a] = m;
            }
        } else if (head.s == "O") {
            p.expect_colon("O");
            need_decls(head.line);
            const std::vector<std::size_t> as = parse_spec(p.get(), actions, "action");
            if (p.accept(":")) {
                const std::vector<std::size_t> s2s = parse_spec(p.get(), states, "state");
                if (p.accept(":")) {
                    const std::vector<std::size_t> os =
                        parse_spec(p.get(), observations, "observation");
                    const double v = cnum(p, "observation probability");
                    for (std::size_t a : as)
                        for (std::size_t s2 : s2s)
                            for (std::size_t o : os) obs[a].at(s2, o) = v;
                } else {
                    std::vector<double> row(observations.size());
                    for (double& v : row) v = cnum(p, "observation row");
                    for (std::size_t a : as)
                        for (std::size_t s2 : s2s)
                            std::copy(row.begin(), row.end(), obs[a].row(s2));
                }
            } else {
                const DenseMat m =
                    read_cmatrix(p, states.size(), observations.size(), "observation matrix");
                for (std::size_t a : as) obs[a] = m;
            }
        } else if (head.s == "R") {
            p.expect_colon("R");
            need_decls(head.line);
            const std::size_t S = states.size(), Z = observations.size();
            const std::vector<std::size_t> as = parse_spec(p.get(), actions, "action");
            if (!p.accept(":")) fail(head.line, "reward entries need at least 'R: a : s'");
            const std::vector<std::size_t> ss = parse_spec(p.get(), states, "state");
            auto cell = [&](std::size_t a, std::size_t s, std::size_t s2,
                            std::size_t o) -> double& {
                return reward[a][(s * S + s2) * Z + o];
            };
            if (p.accept(":")) {
                const std::vector<std::size_t> s2s = parse_spec(p.get(), states, "state");
                if (p.accept(":")) {
                    const std::vector<std::size_t> os =
                        parse_spec(p.get(), observations, "observation");
                    const double v = cnum(p, "reward");
                    for (std::size_t a : as)
                        for (std::size_t s : ss)
                            for (std::size_t s2 : s2s)
                                for (std::size_t o : os) cell(a, s, s2, o) = v;
                } else {
                    std::vector<double> row(Z);
                    for (double& v : row) v = cnum(p, "reward row");
                    for (std::size_t a : as)
                        for (std::size_t s : ss)
                            for (std::size_t s2 : s2s)
                                for (std::size_t o = 0; o < Z; ++o) cell(a, s, s2, o) = row[o];
                }
            } else {
                // matrix over end states x observations
                std::vector<double> block(S * Z);
                for (double& v : block) v = cnum(p, "reward matrix");
                for (std::size_t a : as)
                    for (std::size_t s : ss)
                        for (std::size_t s2 = 0; s2 < S; ++s2)
                            for (std::size_t o = 0; o < Z; ++o)
                                cell(a, s, s2, o) = block[s2 * Z + o];
            }
        } else {
            fail(head.line, "unknown stanza '" + head.s + "'");
        }
    }

    if (states.empty() || actions.empty() || observations.empty())
        fail(0, "missing states, actions, or observations declaration");
    if (trans.empty()) fail(0, "no T/O/R stanzas found");
    if (discount < 0.0) fail(0, "missing discount declaration");
    (void)saw_values;  // default: reward semantics

    const std::size_t S = states.size(), A = actions.size(), Z = observations.size();
    for (std::size_t a = 0; a < A; ++a) {
        normalize_rows_or_fail(trans[a], "transition", "action '" + actions[a] + "'");
        normalize_rows_or_fail(obs[a], "observation", "action '" + actions[a] + "'");
    }
    if (cost_values)
        for (auto& ra : reward)
            for (double& v : ra) v = -v;

    // Fold R(a, s, s', o) into expected immediate maintenance rewards.
    DenseMat r_maint(S, A, 0.0);
    for (std::size_t a = 0; a < A; ++a)
        for (std::size_t s = 0; s < S; ++s) {
            double acc = 0.0;
            for (std::size_t s2 = 0; s2 < S; ++s2) {
                const double t = trans[a].at(s, s2);
                if (t == 0.0) continue;
                double inner = 0.0;
                for (std::size_t o = 0; o < Z; ++o)
                    inner += obs[a].at(s2, o) * reward[a][(s * S + s2) * Z + o];
                acc += t * inner;
            }
            r_maint.at(s, a) = acc;
        }

    double max_r = r_maint.a.empty() ? 0.0 : *std::max_element(r_maint.a.begin(), r_maint.a.end());
    double shift = 0.0;
    if (max_r > 0.0) {
        if (!shift_rewards)
            throw ParseError("model has positive expected rewards; enable the reward shift to "
                             "convert it (values shift down by " +
                             format_g9(max_r) + " per step)");
        shift = max_r;
        for (double& v : r_maint.a) v -= shift;
    }
    if (applied_shift) *applied_shift = shift;

    PomdpModel m;
    m.state_names = states;
    m.maint_names = actions;
    m.obs_action_names = actions;  // mirrored: pair (a, a) carries O(a)
    m.transition.resize(A);
    for (std::size_t a = 0; a < A; ++a) m.transition[a] = TransMat::from_dense(trans[a]);
    m.default_obs = DenseMat(S, 1, 1.0);
    m.obs_model = obs;
    m.reward_maint = r_maint;
    m.reward_obs = DenseMat(S, A, 0.0);
    m.reward_damage.assign(S, 0.0);
    m.discount = discount;
    m.allowed_mask.assign(A * A, 0);
    for (std::size_t a = 0; a < A; ++a) m.allowed_mask[a * A + a] = 1;
    if (start_seen && !start_belief.empty())
        m.initial_belief_probs = start_belief;
    else if (start_seen)
        m.initial_state = start_state;
    else
        m.initial_belief_probs.assign(S, 1.0 / static_cast<double>(S));
    m.finalize();
    m.validate();
    return m;
}

PomdpModel load_cassandra_file(const std::string& path, bool shift_rewards,
                               double* applied_shift) {
    try {
        return parse_cassandra_text(read_text_file(path), shift_rewards, applied_shift);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// bounds archive
// ---------------------------------------------------------------------------

void save_bounds_archive(const ValueBounds& bounds, std::uint64_t config_digest,
                         const std::string& path) {
    const std::size_t S = bounds.upper_corners.size();
    std::string out;
    out.reserve(1 << 14);
    out += "voiplan-bounds 1\n";
    out += "config_digest " + std::to_string(config_digest) + "\n";
    out += "states " + std::to_string(S) + "\n";
    out += "budget_exhausted " + std::to_string(bounds.budget_exhausted ? 1 : 0) + "\n";
    out += "upper_point_cap " + std::to_string(bounds.upper_point_cap) + "\n";
    out += "upper_corners\n";
    append_row_g17(out, bounds.upper_corners.data(), S);
    out += "alphas " + std::to_string(bounds.lower.size()) + "\n";
    for (const AlphaVector& a : bounds.lower) {
        out += std::to_string(a.a_m) + " " + std::to_string(a.a_o);
        for (double v : a.v) out += " " + format_g17(v);
        out += "\n";
    }
    out += "upper_points " + std::to_string(bounds.upper_points.size()) + "\n";
    for (const UpperPoint& up : bounds.upper_points) {
        out += format_g17(up.v);
        for (double v : up.b.p) out += " " + format_g17(v);
        out += "\n";
    }
    write_text_atomic(path, out);
}

ValueBounds load_bounds_archive(const std::string& path, std::uint64_t* config_digest) {
    Scanner sc(read_text_file(path));
    std::string line;
    std::size_t num = 0;
    auto next_tokens = [&](const std::string& what) {
        sc.require(line, num, what);
        return split_ws(line);
    };
    {
        const std::vector<std::string> t = next_tokens("'voiplan-bounds 1' header");
        if (t.size() != 2 || t[0] != "voiplan-bounds" || t[1] != "1")
            fail(num, "expected 'voiplan-bounds 1' header");
    }
    ValueBounds b;
    std::size_t S = 0;
    auto keyed = [&](const char* key) {
        const std::vector<std::string> t = next_tokens(std::string("'") + key + "' line");
        if (t.size() != 2 || t[0] != key) fail(num, std::string("expected '") + key + " <value>'");
        return t[1];
    };
    const std::uint64_t digest = to_u64(keyed("config_digest"), num);
    if (config_digest) *config_digest = digest;
    S = to_size(keyed("states"), num);
    if (S == 0) fail(num, "state count must be positive");
    b.budget_exhausted = to_size(keyed("budget_exhausted"), num) != 0;
    b.upper_point_cap = to_size(keyed("upper_point_cap"), num);
    {
        const std::vector<std::string> t = next_tokens("'upper_corners' line");
        if (t.size() != 1 || t[0] != "upper_corners") fail(num, "expected 'upper_corners'");
        b.upper_corners = read_value_line(sc, S, "upper_corners");
    }
    {
        const std::vector<std::string> t = next_tokens("'alphas <n>' line");
        if (t.size() != 2 || t[0] != "alphas") fail(num, "expected 'alphas <count>'");
        const std::size_t n = to_size(t[1], num);
        b.lower.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::vector<std::string> e = next_tokens("alpha-vector entry");
            if (e.size() != 2 + S) fail(num, "alpha-vector entry needs 'a_m a_o' plus " +
                                                 std::to_string(S) + " values");
            AlphaVector a;
            a.a_m = static_cast<int>(to_size(e[0], num));
            a.a_o = static_cast<int>(to_size(e[1], num));
            a.v.resize(S);
            for (std::size_t j = 0; j < S; ++j) a.v[j] = to_double(e[2 + j], num);
            b.lower.push_back(std::move(a));
        }
    }
    {
        const std::vector<std::string> t = next_tokens("'upper_points <n>' line");
        if (t.size() != 2 || t[0] != "upper_points") fail(num, "expected 'upper_points <count>'");
        const std::size_t n = to_size(t[1], num);
        b.upper_points.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::vector<std::string> e = next_tokens("upper point entry");
            if (e.size() != 1 + S) fail(num, "upper point entry needs a value plus " +
                                                 std::to_string(S) + " belief entries");
            UpperPoint up;
            up.v = to_double(e[0], num);
            up.b.p.resize(S);
            for (std::size_t j = 0; j < S; ++j) up.b.p[j] = to_double(e[1 + j], num);
            b.upper_points.push_back(std::move(up));
        }
    }
    b.rebuild_upper_cache();
    return b;
}

// ---------------------------------------------------------------------------
// text output helpers
// ---------------------------------------------------------------------------

std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open file for writing: " + tmp);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw Error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw Error("rename failed: " + tmp + " -> " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string convergence_csv(const std::vector<ConvergenceRecord>& log) {
    std::string out = "iteration,wall_seconds,lower_root,upper_root,num_alpha,num_beliefs\n";
    for (const ConvergenceRecord& r : log) {
        out += std::to_string(r.iteration) + ",";
        out += format_g9(r.wall_seconds) + ",";
        out += format_g9(r.lower_root) + ",";
        out += format_g9(r.upper_root) + ",";
        out += std::to_string(r.num_alpha) + ",";
        out += std::to_string(r.num_beliefs) + "\n";
    }
    return out;
}

std::string rollout_csv(const std::string& policy_name, const RolloutResult& r,
                        double truncation_bound) {
    std::string out =
        "policy,episodes,horizon,mean,std_error,confidence,ci_halfwidth,min_return,max_return,"
        "truncation_bound\n";
    out += sanitize_csv(policy_name) + ",";
    out += std::to_string(r.episodes) + ",";
    out += std::to_string(r.horizon) + ",";
    out += format_g9(r.mean) + ",";
    out += format_g9(r.std_error) + ",";
    out += format_g9(r.confidence) + ",";
    out += format_g9(r.ci_halfwidth) + ",";
    out += format_g9(r.min_return) + ",";
    out += format_g9(r.max_return) + ",";
    out += format_g9(truncation_bound) + "\n";
    return out;
}

std::string trace_csv(const PomdpModel& model, const PolicyTrace& trace) {
    std::string out =
        "t,true_state,state_name,maintenance,observation,default_outcome,action_outcome,"
        "step_reward,belief_max_state,belief_max_prob,belief_entropy\n";
    for (const TraceStep& s : trace) {
        std::size_t arg = 0;
        double best = -1.0, entropy = 0.0;
        for (std::size_t i = 0; i < s.belief.dim(); ++i) {
            const double v = s.belief.p[i];
            if (v > best) {
                best = v;
                arg = i;
            }
            if (v > 0.0) entropy -= v * std::log(v);
        }
        out += std::to_string(s.t) + ",";
        out += std::to_string(s.true_state) + ",";
        out += sanitize_csv(model.state_names[s.true_state]) + ",";
        out += sanitize_csv(model.maint_names[s.a_m]) + ",";
        out += sanitize_csv(model.obs_action_names[s.a_o]) + ",";
        out += std::to_string(s.obs.default_index) + ",";
        out += std::to_string(s.obs.action_index) + ",";
        out += format_g9(s.step_reward) + ",";
        out += std::to_string(arg) + ",";
        out += format_g9(best) + ",";
        out += format_g9(entropy) + "\n";
    }
    return out;
}

std::string gain_report_csv(const std::string& metric, const GainResult& g) {
    std::string out =
        "metric,first_label,second_label,first_value,first_gap,second_value,second_gap,gain,"
        "uncertainty\n";
    out += sanitize_csv(metric) + ",";
    out += sanitize_csv(g.first.label) + ",";
    out += sanitize_csv(g.second.label) + ",";
    out += format_g9(g.first.value) + ",";
    out += format_g9(g.first.gap) + ",";
    out += format_g9(g.second.value) + ",";
    out += format_g9(g.second.gap) + ",";
    out += format_g9(g.gain) + ",";
    out += format_g9(g.uncertainty) + "\n";
    return out;
}

std::string gain_report_kv(const std::string& metric, const GainResult& g) {
    std::string out;
    out += "metric " + metric + "\n";
    out += "first_label " + g.first.label + "\n";
    out += "first_value " + format_g9(g.first.value) + "\n";
    out += "first_gap " + format_g9(g.first.gap) + "\n";
    out += "second_label " + g.second.label + "\n";
    out += "second_value " + format_g9(g.second.value) + "\n";
    out += "second_gap " + format_g9(g.second.gap) + "\n";
    out += "gain " + format_g9(g.gain) + "\n";
    out += "uncertainty " + format_g9(g.uncertainty) + "\n";
    return out;
}

}  // namespace voiplan
