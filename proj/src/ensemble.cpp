#include "deepfuse/ensemble.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "deepfuse/error.hpp"

namespace deepfuse {

double EvaluationTable::row_mean(std::size_t r) const {
    const auto& row = cells.at(r);
    double s = 0.0;
    for (double v : row) s += v;
    return s / static_cast<double>(row.size());
}

double EvaluationTable::row_std(std::size_t r) const {
    const auto& row = cells.at(r);
    const double m = row_mean(r);
    double s = 0.0;
    for (double v : row) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(row.size()));
}

double EvaluationTable::column_mean(std::size_t c) const {
    double s = 0.0;
    for (const auto& row : cells) s += row.at(c);
    return s / static_cast<double>(cells.size());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (quoted) throw ParseError(line_no, "unterminated quoted field");
    out.push_back(cur);
    for (auto& f : out) {
        while (!f.empty() && std::isspace(static_cast<unsigned char>(f.front()))) f.erase(f.begin());
        while (!f.empty() && std::isspace(static_cast<unsigned char>(f.back()))) f.pop_back();
    }
    return out;
}

double parse_cell(const std::string& s, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        if (!(v >= 0.0 && v <= 1.0)) throw ParseError(line_no, "accuracy '" + s + "' outside [0, 1]");
        return v;
    } catch (const ParseError&) {
        throw;
    } catch (const std::exception&) {
        throw ParseError(line_no, "'" + s + "' is not a number");
    }
}

std::string real17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

EvaluationTable read_evaluation_csv(std::istream& in) {
    EvaluationTable t;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    bool has_average = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto fields = split_csv_line(line, line_no);
        if (!have_header) {
            if (fields.size() < 2 || fields[0] != "extractor") {
                throw ParseError(line_no, "header must start with 'extractor' and name at least one column");
            }
            has_average = fields.back() == "Average";
            const std::size_t end = fields.size() - (has_average ? 1 : 0);
            if (end < 2) throw ParseError(line_no, "no classifier columns");
            t.columns.assign(fields.begin() + 1, fields.begin() + static_cast<std::ptrdiff_t>(end));
            have_header = true;
            continue;
        }
        if (fields[0] == "Average") continue;
        const std::size_t expected = t.columns.size() + 1 + (has_average ? 1 : 0);
        if (fields.size() != expected) {
            throw ParseError(line_no, "expected " + std::to_string(expected) + " fields, found " +
                                          std::to_string(fields.size()));
        }
        if (fields[0].empty()) throw ParseError(line_no, "empty extractor id");
        if (std::find(t.extractors.begin(), t.extractors.end(), fields[0]) != t.extractors.end()) {
            throw ParseError(line_no, "duplicate extractor '" + fields[0] + "'");
        }
        std::vector<double> row;
        for (std::size_t c = 0; c < t.columns.size(); ++c) row.push_back(parse_cell(fields[c + 1], line_no));
        t.extractors.push_back(fields[0]);
        t.cells.push_back(std::move(row));
    }
    if (!have_header) throw ParseError(line_no, "empty table");
    if (t.extractors.empty()) throw ParseError(line_no, "table has no extractor rows");
    return t;
}

EvaluationTable read_evaluation_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open table " + path.string());
    return read_evaluation_csv(in);
}

void write_evaluation_csv(std::ostream& out, const EvaluationTable& t) {
    out << "extractor";
    for (const auto& c : t.columns) out << ',' << csv_field(c);
    out << ",Average\n";
    for (std::size_t r = 0; r < t.extractors.size(); ++r) {
        out << csv_field(t.extractors[r]);
        for (double v : t.cells[r]) out << ',' << real17(v);
        out << ',' << real17(t.row_mean(r)) << '\n';
    }
}

std::string family_key(const std::string& id) {
    if (id.find("_patch") != std::string::npos) {
        const auto pos = id.rfind('_');
        if (pos != std::string::npos && pos + 1 < id.size() &&
            std::all_of(id.begin() + static_cast<std::ptrdiff_t>(pos + 1), id.end(),
                        [](unsigned char c) { return std::isdigit(c); })) {
            return id.substr(0, pos);
        }
        return id;
    }
    std::string key;
    for (char c : id) {
        if (!std::isalpha(static_cast<unsigned char>(c))) break;
        key += c;
    }
    return key.empty() ? id : key;
}

std::vector<std::size_t> rank_rows(const EvaluationTable& t) {
    std::vector<std::size_t> order(t.extractors.size());
    std::vector<double> means(order.size());
    std::vector<double> stds(order.size());
    for (std::size_t r = 0; r < order.size(); ++r) {
        order[r] = r;
        means[r] = t.row_mean(r);
        stds[r] = t.row_std(r);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (means[a] != means[b]) return means[a] > means[b];
        return stds[a] < stds[b];
    });
    return order;
}

Selection select_top_k(const EvaluationTable& t, std::size_t k, const FamilyRule& rule) {
    if (k == 0) throw ConfigError("k must be at least 1");
    if (t.extractors.size() < k) {
        throw SelectionError("table has " + std::to_string(t.extractors.size()) + " rows, fewer than k=" +
                             std::to_string(k));
    }
    Selection sel;
    std::map<std::string, std::string> taken;  // family key -> selected id
    for (std::size_t r : rank_rows(t)) {
        if (sel.ids.size() == k) break;
        RankStep step{t.extractors[r], t.row_mean(r), t.row_std(r), rule(t.extractors[r]), false, {}};
        auto it = taken.find(step.family);
        if (it != taken.end()) {
            step.skipped_for = it->second;
        } else {
            step.selected = true;
            taken.emplace(step.family, step.extractor);
            sel.ids.push_back(step.extractor);
        }
        sel.trace.push_back(std::move(step));
    }
    if (sel.ids.size() < k) {
        throw SelectionError("only " + std::to_string(sel.ids.size()) + " distinct families for k=" + std::to_string(k));
    }
    return sel;
}

std::vector<std::vector<std::size_t>> fusion_candidates(std::size_t selected) {
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t a = 0; a < selected; ++a) {
        for (std::size_t b = a + 1; b < selected; ++b) out.push_back({a, b});
    }
    if (selected >= 3) {
        std::vector<std::size_t> all(selected);
        for (std::size_t i = 0; i < selected; ++i) all[i] = i;
        out.push_back(std::move(all));
    }
    return out;
}

LabeledDataset fuse(std::span<const LabeledDataset> sets, const FamilyRule& rule) {
    std::map<std::string, std::string> seen;
    for (const auto& s : sets) {
        const std::string key = rule(s.source_tag());
        auto [it, inserted] = seen.emplace(key, s.source_tag());
        if (!inserted) {
            throw SelectionError("'" + s.source_tag() + "' and '" + it->second + "' share family key '" + key + "'");
        }
    }
    return concat_columns(sets);
}

std::vector<int> vote_labels(const std::vector<std::vector<int>>& predictions,
                             const std::vector<std::vector<double>>& probas, int class_count) {
    if (predictions.empty() || predictions.size() != probas.size()) {
        throw ShapeError("vote needs matching prediction and probability lists");
    }
    const std::size_t n = predictions.front().size();
    const auto k = static_cast<std::size_t>(class_count);
    for (std::size_t m = 0; m < predictions.size(); ++m) {
        if (predictions[m].size() != n || probas[m].size() != n * k) throw ShapeError("vote member shape mismatch");
    }
    std::vector<int> out(n);
    std::vector<std::size_t> count(k);
    for (std::size_t i = 0; i < n; ++i) {
        std::fill(count.begin(), count.end(), 0);
        for (const auto& p : predictions) ++count[static_cast<std::size_t>(p[i])];
        const std::size_t top = *std::max_element(count.begin(), count.end());
        std::vector<std::size_t> tied;
        for (std::size_t c = 0; c < k; ++c) {
            if (count[c] == top) tied.push_back(c);
        }
        if (tied.size() > 1) {
            double best = -1.0;
            std::vector<std::size_t> still;
            for (std::size_t c : tied) {
                double mean = 0.0;
                for (const auto& p : probas) mean += p[i * k + c];
                mean /= static_cast<double>(probas.size());
                if (mean > best) {
                    best = mean;
                    still.assign(1, c);
                } else if (mean == best) {
                    still.push_back(c);
                }
            }
            tied = std::move(still);
        }
        if (tied.size() == 1) {
            out[i] = static_cast<int>(tied.front());
            continue;
        }
        for (const auto& p : predictions) {
            if (std::find(tied.begin(), tied.end(), static_cast<std::size_t>(p[i])) != tied.end()) {
                out[i] = p[i];
                break;
            }
        }
    }
    return out;
}

std::vector<int> vote_predict(const std::vector<ModelPtr>& members, const FeatureMatrix& x) {
    if (members.size() < 2 || members.size() > 3) {
        throw ConfigError("a vote needs 2 or 3 members, got " + std::to_string(members.size()));
    }
    const int k = members.front()->class_count();
    std::vector<std::vector<int>> preds;
    std::vector<std::vector<double>> probas;
    for (const auto& m : members) {
        if (m->class_count() != k || m->feature_count() != members.front()->feature_count()) {
            throw ShapeError("vote members were fit on different spaces");
        }
        preds.push_back(m->predict(x));
        const FeatureMatrix p = m->predict_proba(x);
        probas.emplace_back(p.values().begin(), p.values().end());
    }
    return vote_labels(preds, probas, k);
}

std::vector<std::vector<Family>> classifier_combinations(const std::vector<Family>& ranked) {
    std::vector<std::vector<Family>> out;
    for (const auto& idx : fusion_candidates(ranked.size())) {
        std::vector<Family> combo;
        for (std::size_t i : idx) combo.push_back(ranked[i]);
        out.push_back(std::move(combo));
    }
    return out;
}

std::vector<Family> top_families(const EvaluationTable& t, std::size_t n) {
    std::vector<std::size_t> order(t.columns.size());
    std::vector<double> means(order.size());
    for (std::size_t c = 0; c < order.size(); ++c) {
        order[c] = c;
        means[c] = t.column_mean(c);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return means[a] > means[b]; });
    std::vector<Family> out;
    for (std::size_t i = 0; i < std::min(n, order.size()); ++i) out.push_back(parse_family(t.columns[order[i]]));
    return out;
}

EvaluationRun evaluate_feature_sets(std::span<const LabeledDataset> sets, const EvaluateOptions& opt) {
    if (sets.empty()) throw ConfigError("no feature sets to evaluate");
    if (opt.families.empty()) throw ConfigError("no classifier families to evaluate");
    for (const auto& s : sets) {
        if (s.labels() != sets.front().labels()) {
            throw AlignmentError("feature set '" + s.source_tag() + "' has different labels from '" +
                                 sets.front().source_tag() + "'");
        }
    }
    EvaluationRun run;
    for (Family f : opt.families) run.table.columns.emplace_back(table_name(f));
    for (const auto& s : sets) {
        run.table.extractors.push_back(s.source_tag());
        std::vector<double> row;
        std::vector<GridSearchResult> searches;
        for (Family f : opt.families) {
            GridSearchOptions gs{opt.folds, opt.seed, opt.workers, kDefaultGridCap, opt.trainer};
            GridSearchResult r = grid_search(s, default_grid(f, opt.profile, s.class_count()), gs);
            row.push_back(r.trials[r.best_index].mean);
            searches.push_back(std::move(r));
        }
        run.table.cells.push_back(std::move(row));
        run.searches.push_back(std::move(searches));
    }
    return run;
}

}  // namespace deepfuse
