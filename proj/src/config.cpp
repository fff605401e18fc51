#include "abcmc/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>

#include "abcmc/csv.hpp"
#include "abcmc/errors.hpp"

namespace abcmc {

namespace {

bool bare_key_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; }

class Parser {
public:
    explicit Parser(const std::string& text) : s_(text) {}

    ConfigDocument run() {
        ConfigDocument doc;
        doc.sections[""];
        std::string section;
        std::set<std::string> seen_sections;
        for (;;) {
            skip_blank_lines();
            if (at_end()) break;
            if (peek() == '[') {
                ++i_;
                skip_spaces();
                section = bare_key();
                skip_spaces();
                expect(']');
                if (!seen_sections.insert(section).second) fail("duplicate section [" + section + "]");
                doc.sections[section];
            } else {
                const std::string key = bare_key();
                skip_spaces();
                expect('=');
                skip_spaces();
                ConfigValue value = parse_value();
                auto& table = doc.sections[section];
                if (table.count(key)) fail("duplicate key '" + key + "'");
                table.emplace(key, std::move(value));
            }
            end_of_line();
        }
        return doc;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("line " + std::to_string(line_), "config line " + std::to_string(line_) + ": " + what);
    }

    bool at_end() const { return i_ >= s_.size(); }
    char peek() const { return at_end() ? '\0' : s_[i_]; }

    void skip_spaces() {
        while (!at_end() && (peek() == ' ' || peek() == '\t')) ++i_;
    }

    void skip_comment() {
        if (peek() == '#') {
            while (!at_end() && peek() != '\n') ++i_;
        }
    }

    void newline() {
        if (peek() == '\r') ++i_;
        if (peek() == '\n') {
            ++i_;
            ++line_;
        }
    }

    void skip_blank_lines() {
        for (;;) {
            skip_spaces();
            skip_comment();
            if (peek() == '\n' || peek() == '\r') {
                newline();
                continue;
            }
            return;
        }
    }

    void end_of_line() {
        skip_spaces();
        skip_comment();
        if (at_end()) return;
        if (peek() != '\n' && peek() != '\r') fail(std::string("unexpected '") + peek() + "'");
        newline();
    }

    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++i_;
    }

    std::string bare_key() {
        const std::size_t start = i_;
        while (!at_end() && bare_key_char(peek())) ++i_;
        if (i_ == start) fail("expected a key");
        return s_.substr(start, i_ - start);
    }

    ConfigValue parse_value() {
        const char c = peek();
        if (c == '"') return {parse_string()};
        if (c == '[') return {parse_array()};
        if (s_.compare(i_, 4, "true") == 0 && !bare_key_char(s_.size() > i_ + 4 ? s_[i_ + 4] : ' ')) {
            i_ += 4;
            return {true};
        }
        if (s_.compare(i_, 5, "false") == 0 && !bare_key_char(s_.size() > i_ + 5 ? s_[i_ + 5] : ' ')) {
            i_ += 5;
            return {false};
        }
        return parse_number();
    }

    std::string parse_string() {
        expect('"');
        std::string out;
        for (;;) {
            if (at_end() || peek() == '\n') fail("unterminated string");
            const char c = s_[i_++];
            if (c == '"') return out;
            if (c == '\\') {
                const char e = peek();
                ++i_;
                switch (e) {
                    case '"': out.push_back('"'); break;
                    case '\\': out.push_back('\\'); break;
                    case 'n': out.push_back('\n'); break;
                    case 't': out.push_back('\t'); break;
                    default: fail("unsupported escape");
                }
            } else {
                out.push_back(c);
            }
        }
    }

    ConfigValue::Array parse_array() {
        expect('[');
        ConfigValue::Array out;
        for (;;) {
            skip_blank_lines();
            if (peek() == ']') {
                ++i_;
                return out;
            }
            out.push_back(parse_value());
            skip_blank_lines();
            if (peek() == ',') {
                ++i_;
                continue;
            }
            if (peek() != ']') fail("expected ',' or ']' in array");
        }
    }

    ConfigValue parse_number() {
        const std::size_t start = i_;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' || peek() == '-' ||
                             peek() == '.' || peek() == '_')) {
            ++i_;
        }
        std::string tok = s_.substr(start, i_ - start);
        if (tok.empty()) fail("expected a value");
        tok.erase(std::remove(tok.begin(), tok.end(), '_'), tok.end());
        const char* first = tok.data();
        const char* last = tok.data() + tok.size();
        if (*first == '+') ++first;
        const bool is_float = tok.find_first_of(".eE") != std::string::npos;
        if (is_float) {
            double d = 0.0;
            auto [p, ec] = std::from_chars(first, last, d);
            if (ec != std::errc{} || p != last || !std::isfinite(d)) fail("bad number '" + tok + "'");
            return {d};
        }
        std::int64_t n = 0;
        auto [p, ec] = std::from_chars(first, last, n);
        if (ec != std::errc{} || p != last) fail("bad value '" + tok + "'");
        return {n};
    }

    const std::string& s_;
    std::size_t i_ = 0;
    int line_ = 1;
};

/// Typed access to one section; rejects keys outside the allowed list up front.
class Section {
public:
    Section(const ConfigDocument& doc, std::string name, std::set<std::string> allowed)
        : name_(std::move(name)) {
        if (auto it = doc.sections.find(name_); it != doc.sections.end()) kv_ = &it->second;
        if (!kv_) return;
        for (const auto& [key, value] : *kv_) {
            if (!allowed.count(key)) throw ConfigError(field(key), "unknown key '" + field(key) + "'");
        }
    }

    std::string field(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

    [[noreturn]] void bad(const std::string& key, const std::string& why) const {
        throw ConfigError(field(key), field(key) + ": " + why);
    }

    bool has(const std::string& key) const { return kv_ && kv_->count(key); }

    std::optional<double> real(const std::string& key) const {
        const auto* v = get(key);
        if (!v) return std::nullopt;
        return as_real(*v, key);
    }

    std::optional<std::int64_t> integer(const std::string& key) const {
        const auto* v = get(key);
        if (!v) return std::nullopt;
        if (const auto* n = std::get_if<std::int64_t>(&v->v)) return *n;
        bad(key, "expected an integer");
    }

    std::optional<std::string> string(const std::string& key) const {
        const auto* v = get(key);
        if (!v) return std::nullopt;
        if (const auto* s = std::get_if<std::string>(&v->v)) return *s;
        bad(key, "expected a string");
    }

    std::optional<std::vector<double>> reals(const std::string& key) const {
        const auto* arr = array(key);
        if (!arr) return std::nullopt;
        std::vector<double> out;
        for (const auto& e : *arr) out.push_back(as_real(e, key));
        return out;
    }

    std::optional<std::vector<std::int64_t>> integers(const std::string& key) const {
        const auto* arr = array(key);
        if (!arr) return std::nullopt;
        std::vector<std::int64_t> out;
        for (const auto& e : *arr) {
            const auto* n = std::get_if<std::int64_t>(&e.v);
            if (!n) bad(key, "expected an array of integers");
            out.push_back(*n);
        }
        return out;
    }

    std::optional<std::vector<std::string>> strings(const std::string& key) const {
        const auto* arr = array(key);
        if (!arr) return std::nullopt;
        std::vector<std::string> out;
        for (const auto& e : *arr) {
            const auto* s = std::get_if<std::string>(&e.v);
            if (!s) bad(key, "expected an array of strings");
            out.push_back(*s);
        }
        return out;
    }

private:
    const ConfigValue* get(const std::string& key) const {
        if (!kv_) return nullptr;
        auto it = kv_->find(key);
        return it == kv_->end() ? nullptr : &it->second;
    }

    const ConfigValue::Array* array(const std::string& key) const {
        const auto* v = get(key);
        if (!v) return nullptr;
        const auto* arr = std::get_if<ConfigValue::Array>(&v->v);
        if (!arr) bad(key, "expected an array");
        if (arr->empty()) bad(key, "array must not be empty");
        return arr;
    }

    double as_real(const ConfigValue& v, const std::string& key) const {
        if (const auto* d = std::get_if<double>(&v.v)) return *d;
        if (const auto* n = std::get_if<std::int64_t>(&v.v)) return static_cast<double>(*n);
        bad(key, "expected a number");
    }

    std::string name_;
    const std::map<std::string, ConfigValue>* kv_ = nullptr;
};

bool open_unit(double v) { return v > 0.0 && v < 1.0; }

template <typename T>
void check_each(const Section& sec, const std::string& key, const std::vector<T>& values, bool (*ok)(T),
                const std::string& why) {
    for (T v : values) {
        if (!ok(v)) sec.bad(key, why);
    }
}

std::size_t positive_count(const Section& sec, const std::string& key, std::int64_t v) {
    if (v < 1) sec.bad(key, "must be >= 1");
    return static_cast<std::size_t>(v);
}

LVPrior parse_prior(const Section& sec, const std::string& key, const std::string& text) {
    if (text == "Prior1") return LVPrior::Prior1;
    if (text == "Prior2") return LVPrior::Prior2;
    sec.bad(key, "expected \"Prior1\" or \"Prior2\"");
}

void read_geometric(const Section& sec, FigureGrid& g) {
    if (auto v = sec.real("a")) {
        if (!open_unit(*v)) sec.bad("a", "must lie in (0, 1)");
        g.a = *v;
    }
    if (sec.has("b") && sec.has("b_values")) sec.bad("b", "give either b or b_values, not both");
    if (auto v = sec.real("b")) g.b_values = {*v};
    if (auto v = sec.reals("b_values")) g.b_values = *v;
    check_each<double>(sec, sec.has("b") ? "b" : "b_values", g.b_values, open_unit, "must lie in (0, 1)");
    if (auto v = sec.integers("d_grid")) {
        g.d_grid.assign(v->begin(), v->end());
        for (auto d : *v) {
            if (d < 2 || d > 100'000) sec.bad("d_grid", "entries must be >= 2");
        }
    }
    if (auto v = sec.integers("t_grid")) {
        g.t_grid.assign(v->begin(), v->end());
        for (auto t : *v) {
            if (t < 1 || t > 100'000) sec.bad("t_grid", "entries must be >= 1");
        }
    }
    if (auto v = sec.integer("tail_D")) {
        if (*v < 2 || *v > 100'000) sec.bad("tail_D", "must be >= 2");
        g.tail_D = static_cast<int>(*v);
    }
    if (auto v = sec.reals("a_values_vary")) {
        check_each<double>(sec, "a_values_vary", *v, open_unit, "entries must lie in (0, 1)");
        g.a_values_vary = *v;
    }
    if (auto v = sec.real("b_vary")) {
        if (!open_unit(*v)) sec.bad("b_vary", "must lie in (0, 1)");
        g.b_vary = *v;
    }
    if (auto v = sec.strings("kernels")) {
        g.kernels.clear();
        for (const auto& k : *v) {
            try {
                g.kernels.push_back(parse_kernel_choice(k));
            } catch (const DomainError& e) {
                sec.bad("kernels", e.what());
            }
        }
    }
}

void read_compact(const Section& sec, CompactRunConfig& c) {
    if (auto v = sec.real("a")) {
        if (!(*v >= 1.0)) sec.bad("a", "must be >= 1");
        c.spec.a = *v;
    }
    if (auto v = sec.real("b")) {
        if (!(*v > 0.0 && *v <= 1.0)) sec.bad("b", "must lie in (0, 1]");
        c.spec.b = *v;
    }
    if (auto v = sec.integer("iterations")) c.iterations = positive_count(sec, "iterations", *v);
}

void read_lv_common(const Section& sec, LVExperimentConfig& lv) {
    if (auto v = sec.string("prior")) lv.prior = parse_prior(sec, "prior", *v);
    if (auto v = sec.real("eps")) {
        if (!(*v > 0.0)) sec.bad("eps", "must be positive");
        lv.eps = *v;
    }
    if (auto v = sec.integer("event_cap")) {
        if (*v < 100'000) sec.bad("event_cap", "must be >= 100000");
        lv.event_cap = static_cast<std::uint64_t>(*v);
    }
}

void read_lv(const Section& sec, LVRunConfig& c) {
    read_lv_common(sec, c.lv);
    if (auto v = sec.integer("race_cap")) c.lv.race_cap = positive_count(sec, "race_cap", *v);
    if (auto v = sec.reals("theta0")) {
        if (v->size() != 3) sec.bad("theta0", "needs 3 entries");
        for (double t : *v) {
            if (!(t >= 0.0)) sec.bad("theta0", "entries must be >= 0");
        }
        c.lv.theta0 = {(*v)[0], (*v)[1], (*v)[2]};
    }
    if (auto v = sec.reals("step_sd")) {
        if (v->size() != 3) sec.bad("step_sd", "needs 3 entries");
        for (double s : *v) {
            if (!(s >= 0.0)) sec.bad("step_sd", "entries must be >= 0");
        }
        c.lv.step_sd = {(*v)[0], (*v)[1], (*v)[2]};
    }
    if (auto v = sec.strings("kernels")) {
        c.kernels.clear();
        for (const auto& k : *v) {
            try {
                c.kernels.push_back(parse_lv_kernel(k));
            } catch (const DomainError& e) {
                sec.bad("kernels", e.what());
            }
        }
    }
    if (auto v = sec.integer("iterations")) c.iterations = positive_count(sec, "iterations", *v);
    if (auto v = sec.integer("rejection_accepts")) {
        if (*v < 0) sec.bad("rejection_accepts", "must be >= 0");
        c.rejection_accepts = static_cast<std::size_t>(*v);
    }
    if (auto v = sec.integer("rejection_cap")) c.rejection_cap = positive_count(sec, "rejection_cap", *v);
}

void read_analyze(const Section& sec, AnalyzeRunConfig& c) {
    auto input = sec.string("input");
    if (!input) sec.bad("input", "missing required key");
    c.input = *input;
    if (auto v = sec.integer("tv_steps")) c.tv_steps = positive_count(sec, "tv_steps", *v);
}

void read_rejection(const Section& sec, RejectionRunConfig& c) {
    if (auto v = sec.string("model")) {
        if (*v == "geometric") {
            c.model = RejectionModel::Geometric;
        } else if (*v == "compact") {
            c.model = RejectionModel::Compact;
        } else if (*v == "lv") {
            c.model = RejectionModel::LotkaVolterra;
        } else {
            sec.bad("model", "expected \"geometric\", \"compact\" or \"lv\"");
        }
    }
    if (c.model == RejectionModel::Compact) c.a = 1.0;
    if (auto v = sec.real("a")) c.a = *v;
    if (auto v = sec.real("b")) c.b = *v;
    if (c.model == RejectionModel::Geometric) {
        if (!open_unit(c.a)) sec.bad("a", "must lie in (0, 1)");
        if (!open_unit(c.b)) sec.bad("b", "must lie in (0, 1)");
    } else if (c.model == RejectionModel::Compact) {
        if (!(c.a >= 1.0)) sec.bad("a", "must be >= 1");
        if (!(c.b > 0.0 && c.b <= 1.0)) sec.bad("b", "must lie in (0, 1]");
    }
    if (auto v = sec.integer("D")) {
        if (*v < 2 || *v > 1'000'000) sec.bad("D", "must be >= 2");
        c.D = static_cast<int>(*v);
    }
    read_lv_common(sec, c.lv);
    if (auto v = sec.integer("target_accepts")) c.target_accepts = positive_count(sec, "target_accepts", *v);
    if (auto v = sec.integer("proposal_cap")) c.proposal_cap = positive_count(sec, "proposal_cap", *v);
}

}  // namespace

ConfigDocument parse_config_document(const std::string& text) { return Parser(text).run(); }

std::string experiment_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::GeometricFigures: return "geometric-figures";
        case ExperimentKind::Compact: return "compact";
        case ExperimentKind::LotkaVolterra: return "lv";
        case ExperimentKind::AnalyzeChain: return "analyze-chain";
        case ExperimentKind::Rejection: return "rejection";
    }
    return "?";
}

ExperimentConfig parse_experiment_config(const std::string& text) {
    const ConfigDocument doc = parse_config_document(text);
    ExperimentConfig cfg;
    cfg.source = text;

    const Section top(doc, "", {"experiment", "seed", "output_dir", "threads"});
    const auto name = top.string("experiment");
    if (!name) top.bad("experiment", "missing required key");
    bool known = false;
    for (auto kind : {ExperimentKind::GeometricFigures, ExperimentKind::Compact, ExperimentKind::LotkaVolterra,
                      ExperimentKind::AnalyzeChain, ExperimentKind::Rejection}) {
        if (experiment_name(kind) == *name) {
            cfg.experiment = kind;
            known = true;
        }
    }
    if (!known) top.bad("experiment", "unknown experiment '" + *name + "'");

    const auto seed = top.integer("seed");
    if (!seed) top.bad("seed", "missing required key");
    if (*seed < 0) top.bad("seed", "must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(*seed);
    if (auto v = top.string("output_dir")) {
        if (v->empty()) top.bad("output_dir", "must not be empty");
        cfg.output_dir = *v;
    }
    if (auto v = top.integer("threads")) {
        if (*v < 1 || *v > 1024) top.bad("threads", "must lie in [1, 1024]");
        cfg.threads = static_cast<unsigned>(*v);
    }

    for (const auto& [section, table] : doc.sections) {
        if (!section.empty() && section != *name) {
            throw ConfigError(section, "unknown section [" + section + "] for experiment '" + *name + "'");
        }
    }

    switch (cfg.experiment) {
        case ExperimentKind::GeometricFigures:
            read_geometric(Section(doc, *name, {"a", "b", "b_values", "d_grid", "t_grid", "tail_D", "a_values_vary",
                                                "b_vary", "kernels"}),
                           cfg.geometric);
            break;
        case ExperimentKind::Compact:
            read_compact(Section(doc, *name, {"a", "b", "iterations"}), cfg.compact);
            break;
        case ExperimentKind::LotkaVolterra:
            read_lv(Section(doc, *name, {"prior", "eps", "event_cap", "race_cap", "theta0", "step_sd", "kernels",
                                         "iterations", "rejection_accepts", "rejection_cap"}),
                    cfg.lv);
            break;
        case ExperimentKind::AnalyzeChain:
            read_analyze(Section(doc, *name, {"input", "tv_steps"}), cfg.analyze);
            break;
        case ExperimentKind::Rejection:
            read_rejection(Section(doc, *name, {"model", "a", "b", "D", "prior", "eps", "event_cap",
                                                "target_accepts", "proposal_cap"}),
                           cfg.rejection);
            break;
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const IoError& e) {
        throw ConfigError("path", e.what());
    }
    return parse_experiment_config(text);
}

}  // namespace abcmc
