#pragma once

// Network definition documents (.qdn.json) and result tables (.json/.csv).
//
//   {
//     "version": 1,
//     "register_ranks": [3, 3],
//     "initial": [0],
//     "stages": [
//       {"passthrough": "strict",
//        "rules": [{"from": [0],
//                   "to": [{"re": 0.6, "im": 0, "monomial": [1]},
//                          {"re": 0, "im": 0.8, "monomial": [2]}]}]}
//     ],
//     "queries": "all"
//   }
//
// Monomials are ascending index lists. Floating-point values are written with
// 17 significant digits so that doubles survive a round trip bit for bit.
// Parsing checks structure only (types, index ranges, rank chaining);
// probability conservation is validate_program's business.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "qdn/errors.hpp"
#include "qdn/register.hpp"
#include "qdn/stage.hpp"

namespace qdn {

/// Base class for document errors; `location()` is "line L, column C" for
/// syntax errors and a field path such as "stages[0].rules[1].to[0].re"
/// otherwise.
class NetDefError : public Error {
  public:
    NetDefError(std::string location, const std::string &message)
        : Error(location + ": " + message), location_(std::move(location)) {}

    const std::string &location() const noexcept { return location_; }

  private:
    std::string location_;
};

/// Malformed JSON, wrong field types, missing or unknown fields.
class NetDefParseError : public NetDefError {
  public:
    using NetDefError::NetDefError;
};

/// Unsupported document version.
class NetDefVersionError : public NetDefError {
  public:
    using NetDefError::NetDefError;
};

/// An index exceeds its declared register rank, or ranks do not chain.
class NetDefRangeError : public NetDefError {
  public:
    using NetDefError::NetDefError;
};

struct NetDefTerm {
    double re = 0.0;
    double im = 0.0;
    std::vector<unsigned> monomial;

    friend bool operator==(const NetDefTerm &, const NetDefTerm &) = default;
};

struct NetDefRule {
    std::vector<unsigned> from;
    std::vector<NetDefTerm> to;

    friend bool operator==(const NetDefRule &, const NetDefRule &) = default;
};

struct NetDefStage {
    Passthrough passthrough = Passthrough::strict;
    std::vector<NetDefRule> rules;

    friend bool operator==(const NetDefStage &, const NetDefStage &) = default;
};

/// `"all"` or an explicit list of outcome monomials.
struct NetDefQueries {
    bool all = true;
    std::vector<std::vector<unsigned>> monomials;

    friend bool operator==(const NetDefQueries &,
                           const NetDefQueries &) = default;
};

struct NetDefDocument {
    int version = 1;
    std::vector<unsigned> register_ranks;
    std::vector<unsigned> initial;
    std::vector<NetDefStage> stages;
    std::optional<NetDefQueries> queries;

    friend bool operator==(const NetDefDocument &,
                           const NetDefDocument &) = default;
};

namespace detail {

using nlohmann::json;

inline std::string line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

inline const json &require_field(const json &obj, const char *key,
                                 const std::string &path) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw NetDefParseError(path, std::string("missing field \"") + key + "\"");
    }
    return *it;
}

inline void reject_unknown(const json &obj, std::initializer_list<const char *> keys,
                           const std::string &path) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char *k : keys) {
            if (it.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw NetDefParseError(path, "unknown field \"" + it.key() + "\"");
        }
    }
}

inline void require_object(const json &j, const std::string &path) {
    if (!j.is_object()) {
        throw NetDefParseError(path, "expected an object");
    }
}

inline void require_array(const json &j, const std::string &path) {
    if (!j.is_array()) {
        throw NetDefParseError(path, "expected an array");
    }
}

inline std::uint64_t read_unsigned(const json &j, const std::string &path) {
    if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() &&
                                   j.get<std::int64_t>() < 0)) {
        throw NetDefParseError(path, "expected a non-negative integer");
    }
    return j.get<std::uint64_t>();
}

inline double read_number(const json &j, const std::string &path) {
    if (!j.is_number()) {
        throw NetDefParseError(path, "expected a number");
    }
    return j.get<double>();
}

/// Ascending index list with every entry below `rank`.
inline std::vector<unsigned> read_monomial(const json &j, unsigned rank,
                                           const std::string &path) {
    require_array(j, path);
    std::vector<unsigned> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string p = path + "[" + std::to_string(i) + "]";
        const std::uint64_t k = read_unsigned(j[i], p);
        if (k >= rank) {
            throw NetDefRangeError(p, "index " + std::to_string(k) +
                                          " outside declared rank " +
                                          std::to_string(rank));
        }
        if (!out.empty() && k <= out.back()) {
            throw NetDefParseError(p, "monomial indices must be strictly "
                                      "ascending");
        }
        out.push_back(static_cast<unsigned>(k));
    }
    return out;
}

} // namespace detail

/// Parses and structurally checks a document. Throws NetDefParseError,
/// NetDefVersionError or NetDefRangeError.
inline NetDefDocument parse_netdef(std::string_view text) {
    using detail::json;
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error &e) {
        throw NetDefParseError(detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1),
                               "malformed JSON");
    }
    detail::require_object(root, "document");
    detail::reject_unknown(root,
                           {"version", "register_ranks", "initial", "stages",
                            "queries"},
                           "document");

    NetDefDocument doc;
    const json &version = detail::require_field(root, "version", "document");
    if (!version.is_number_integer()) {
        throw NetDefParseError("version", "expected an integer");
    }
    if (version.get<std::int64_t>() != 1) {
        throw NetDefVersionError("version", "unsupported version " +
                                                version.dump() + " (expected 1)");
    }
    doc.version = 1;

    const json &ranks = detail::require_field(root, "register_ranks", "document");
    detail::require_array(ranks, "register_ranks");
    if (ranks.empty()) {
        throw NetDefParseError("register_ranks", "needs at least one rank");
    }
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        const std::string p = "register_ranks[" + std::to_string(i) + "]";
        const std::uint64_t r = detail::read_unsigned(ranks[i], p);
        if (r < 1 || r > kMaxRank) {
            throw NetDefRangeError(p, "rank " + std::to_string(r) +
                                          " outside [1, 64]");
        }
        doc.register_ranks.push_back(static_cast<unsigned>(r));
    }

    doc.initial = detail::read_monomial(
        detail::require_field(root, "initial", "document"),
        doc.register_ranks.front(), "initial");

    const json &stages = detail::require_field(root, "stages", "document");
    detail::require_array(stages, "stages");
    if (stages.size() + 1 != doc.register_ranks.size()) {
        throw NetDefRangeError("register_ranks",
                               std::to_string(doc.register_ranks.size()) +
                                   " ranks declared for " +
                                   std::to_string(stages.size()) +
                                   " stages (need stages + 1)");
    }
    for (std::size_t n = 0; n < stages.size(); ++n) {
        const std::string sp = "stages[" + std::to_string(n) + "]";
        const json &js = stages[n];
        detail::require_object(js, sp);
        detail::reject_unknown(js, {"passthrough", "rules"}, sp);
        const unsigned r_in = doc.register_ranks[n];
        const unsigned r_out = doc.register_ranks[n + 1];

        NetDefStage stage;
        if (auto it = js.find("passthrough"); it != js.end()) {
            if (*it == "strict") {
                stage.passthrough = Passthrough::strict;
            } else if (*it == "identity") {
                stage.passthrough = Passthrough::identity;
            } else {
                throw NetDefParseError(sp + ".passthrough",
                                       "expected \"strict\" or \"identity\"");
            }
        }
        const json &rules = detail::require_field(js, "rules", sp);
        detail::require_array(rules, sp + ".rules");
        std::set<unsigned> sources;
        for (std::size_t r = 0; r < rules.size(); ++r) {
            const std::string rp = sp + ".rules[" + std::to_string(r) + "]";
            const json &jr = rules[r];
            detail::require_object(jr, rp);
            detail::reject_unknown(jr, {"from", "to"}, rp);
            NetDefRule rule;
            rule.from = detail::read_monomial(detail::require_field(jr, "from", rp),
                                              r_in, rp + ".from");
            if (rule.from.size() != 1) {
                throw NetDefParseError(rp + ".from",
                                       "a rule rewrites exactly one generator");
            }
            if (!sources.insert(rule.from.front()).second) {
                throw NetDefParseError(rp + ".from",
                                       "generator " +
                                           std::to_string(rule.from.front()) +
                                           " already has a rule in this stage");
            }
            const json &to = detail::require_field(jr, "to", rp);
            detail::require_array(to, rp + ".to");
            if (to.empty()) {
                throw NetDefParseError(rp + ".to", "a rule needs at least one target");
            }
            std::set<std::vector<unsigned>> targets;
            for (std::size_t t = 0; t < to.size(); ++t) {
                const std::string tp = rp + ".to[" + std::to_string(t) + "]";
                const json &jt = to[t];
                detail::require_object(jt, tp);
                detail::reject_unknown(jt, {"re", "im", "monomial"}, tp);
                NetDefTerm term;
                term.re = detail::read_number(detail::require_field(jt, "re", tp),
                                              tp + ".re");
                term.im = detail::read_number(detail::require_field(jt, "im", tp),
                                              tp + ".im");
                term.monomial = detail::read_monomial(
                    detail::require_field(jt, "monomial", tp), r_out,
                    tp + ".monomial");
                if (term.monomial.empty()) {
                    throw NetDefParseError(tp + ".monomial",
                                           "target monomial must not be empty");
                }
                if (!targets.insert(term.monomial).second) {
                    throw NetDefParseError(tp + ".monomial",
                                           "target repeated within one rule");
                }
                rule.to.push_back(std::move(term));
            }
            stage.rules.push_back(std::move(rule));
        }
        doc.stages.push_back(std::move(stage));
    }

    if (auto it = root.find("queries"); it != root.end()) {
        NetDefQueries q;
        if (it->is_string()) {
            if (*it != "all") {
                throw NetDefParseError("queries", "expected \"all\" or a list");
            }
        } else {
            detail::require_array(*it, "queries");
            q.all = false;
            for (std::size_t i = 0; i < it->size(); ++i) {
                q.monomials.push_back(detail::read_monomial(
                    (*it)[i], doc.register_ranks.back(),
                    "queries[" + std::to_string(i) + "]"));
            }
        }
        doc.queries = std::move(q);
    }
    return doc;
}

namespace detail {

/// %.17g, with non-finite values rejected (JSON has no spelling for them).
inline std::string format_double(double x) {
    if (!std::isfinite(x)) {
        throw ArgumentError("cannot serialize a non-finite number");
    }
    if (x == 0.0 && std::signbit(x)) {
        return "-0.0"; // "-0" would come back as the integer 0
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string format_indices(const std::vector<unsigned> &idx) {
    std::string s = "[";
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i > 0) {
            s += ", ";
        }
        s += std::to_string(idx[i]);
    }
    return s + "]";
}

} // namespace detail

/// Canonical pretty-printed text of a document.
inline std::string serialize_netdef(const NetDefDocument &doc) {
    std::ostringstream out;
    out << "{\n";
    out << "  \"version\": " << doc.version << ",\n";
    out << "  \"register_ranks\": " << detail::format_indices(doc.register_ranks)
        << ",\n";
    out << "  \"initial\": " << detail::format_indices(doc.initial) << ",\n";
    out << "  \"stages\": [";
    for (std::size_t n = 0; n < doc.stages.size(); ++n) {
        const auto &stage = doc.stages[n];
        out << (n == 0 ? "\n" : ",\n");
        out << "    {\n      \"passthrough\": \""
            << (stage.passthrough == Passthrough::strict ? "strict" : "identity")
            << "\",\n      \"rules\": [";
        for (std::size_t r = 0; r < stage.rules.size(); ++r) {
            const auto &rule = stage.rules[r];
            out << (r == 0 ? "\n" : ",\n");
            out << "        {\"from\": " << detail::format_indices(rule.from)
                << ", \"to\": [";
            for (std::size_t t = 0; t < rule.to.size(); ++t) {
                const auto &term = rule.to[t];
                out << (t == 0 ? "\n" : ",\n");
                out << "          {\"re\": " << detail::format_double(term.re)
                    << ", \"im\": " << detail::format_double(term.im)
                    << ", \"monomial\": " << detail::format_indices(term.monomial)
                    << "}";
            }
            out << "\n        ]}";
        }
        out << (stage.rules.empty() ? "]\n    }" : "\n      ]\n    }");
    }
    out << (doc.stages.empty() ? "]" : "\n  ]");
    if (doc.queries) {
        out << ",\n  \"queries\": ";
        if (doc.queries->all) {
            out << "\"all\"";
        } else {
            out << "[";
            for (std::size_t i = 0; i < doc.queries->monomials.size(); ++i) {
                if (i > 0) {
                    out << ", ";
                }
                out << detail::format_indices(doc.queries->monomials[i]);
            }
            out << "]";
        }
    }
    out << "\n}\n";
    return out.str();
}

/// Builds the executable program. Total on documents accepted by
/// parse_netdef.
inline NetworkProgram compile(const NetDefDocument &doc) {
    std::vector<StageMap> stages;
    for (std::size_t n = 0; n < doc.stages.size(); ++n) {
        std::vector<RewriteRule> rules;
        for (const auto &r : doc.stages[n].rules) {
            RewriteRule rule{r.from.front(), {}};
            for (const auto &t : r.to) {
                rule.targets.push_back(
                    RuleTerm{Complex{t.re, t.im}, SignalMonomial(t.monomial)});
            }
            rules.push_back(std::move(rule));
        }
        stages.emplace_back(doc.register_ranks[n], doc.register_ranks[n + 1],
                            std::move(rules), doc.stages[n].passthrough);
    }
    return NetworkProgram(doc.register_ranks.front(),
                          SignalMonomial(doc.initial), std::move(stages));
}

/// Document describing `program`; rules appear in ascending source order.
inline NetDefDocument to_netdef(const NetworkProgram &program,
                                std::optional<NetDefQueries> queries =
                                    NetDefQueries{}) {
    NetDefDocument doc;
    doc.register_ranks = program.register_ranks();
    doc.initial = program.initial().indices();
    for (const auto &stage : program.stages()) {
        NetDefStage s;
        s.passthrough = stage.passthrough();
        for (const auto &[k, rule] : stage.rules()) {
            NetDefRule r;
            r.from = {k};
            for (const auto &t : rule.targets) {
                r.to.push_back(NetDefTerm{t.coefficient.real(), t.coefficient.imag(),
                                          t.monomial.indices()});
            }
            s.rules.push_back(std::move(r));
        }
        doc.stages.push_back(std::move(s));
    }
    doc.queries = std::move(queries);
    return doc;
}

/// Outcome monomials requested by the document, or nullopt for "all".
inline std::optional<std::vector<SignalMonomial>>
queried_outcomes(const NetDefDocument &doc) {
    if (!doc.queries || doc.queries->all) {
        return std::nullopt;
    }
    std::vector<SignalMonomial> out;
    for (const auto &m : doc.queries->monomials) {
        out.emplace_back(m);
    }
    return out;
}

enum class ResultFormat { json, csv };

/// Deterministic rendering of a probability table, rows ascending by basis
/// index. CSV columns: monomial (space-separated indices), basis_index,
/// amp_re, amp_im, probability.
inline std::string emit_results(const ProbabilityTable &table,
                                ResultFormat format) {
    std::vector<Outcome> rows = table.outcomes;
    std::sort(rows.begin(), rows.end(), [](const Outcome &a, const Outcome &b) {
        return a.index < b.index;
    });
    std::ostringstream out;
    if (format == ResultFormat::csv) {
        out << "monomial,basis_index,amp_re,amp_im,probability\n";
        for (const auto &o : rows) {
            const auto idx = o.monomial().indices();
            for (std::size_t i = 0; i < idx.size(); ++i) {
                out << (i == 0 ? "" : " ") << idx[i];
            }
            out << "," << o.index.value << ","
                << detail::format_double(o.amplitude.real()) << ","
                << detail::format_double(o.amplitude.imag()) << ","
                << detail::format_double(o.probability) << "\n";
        }
        return out.str();
    }
    out << "{\n  \"register_rank\": " << table.rank << ",\n  \"outcomes\": [";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto &o = rows[i];
        out << (i == 0 ? "\n" : ",\n");
        out << "    {\"monomial\": " << detail::format_indices(o.monomial().indices())
            << ", \"basis_index\": " << o.index.value
            << ", \"amp_re\": " << detail::format_double(o.amplitude.real())
            << ", \"amp_im\": " << detail::format_double(o.amplitude.imag())
            << ", \"probability\": " << detail::format_double(o.probability) << "}";
    }
    out << (rows.empty() ? "]\n}\n" : "\n  ]\n}\n");
    return out.str();
}

} // namespace qdn
