#include "mdcms/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace mdcms::sim {

namespace {

constexpr int kMaxL = 3;
constexpr int kMaxN = 12;
constexpr std::size_t kMaxWordsPerBook = 4096;
constexpr std::size_t kMaxTotalSymbols = std::size_t(1) << 24;

struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    double uniform01() { return double(next() >> 11) * 0x1.0p-53; }
    int categorical(const std::vector<double>& pmf) {
        double u = uniform01();
        for (std::size_t i = 0; i + 1 < pmf.size(); ++i) {
            u -= pmf[i];
            if (u < 0.0) return int(i);
        }
        return int(pmf.size()) - 1;
    }
};

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a ^ (0x9E3779B97F4A7C15ULL * (b + 1));
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Conditional PMF table P(var | conds), indexed by the conds' mixed-radix cell.
struct ConditionalTable {
    int var_alphabet = 1;
    std::vector<int> cond_alphabets;
    std::vector<double> pmf;  // [cond_cell * var_alphabet + symbol]

    static ConditionalTable build(const JointDistribution& joint, int var,
                                  const std::vector<int>& conds) {
        ConditionalTable t;
        t.var_alphabet = joint.variables()[std::size_t(var)].alphabet;
        std::size_t cond_cells = 1;
        for (int c : conds) {
            t.cond_alphabets.push_back(joint.variables()[std::size_t(c)].alphabet);
            cond_cells *= std::size_t(t.cond_alphabets.back());
        }
        t.pmf.assign(cond_cells * std::size_t(t.var_alphabet), 0.0);
        std::vector<int> digits(joint.variables().size(), 0);
        for (std::size_t cell = 0; cell < joint.cells(); ++cell) {
            std::size_t cc = 0;
            for (std::size_t i = 0; i < conds.size(); ++i)
                cc = cc * std::size_t(t.cond_alphabets[i]) +
                     std::size_t(digits[std::size_t(conds[i])]);
            t.pmf[cc * std::size_t(t.var_alphabet) + std::size_t(digits[std::size_t(var)])] +=
                joint.probs()[cell];
            for (int i = int(digits.size()) - 1; i >= 0; --i) {
                if (++digits[i] < joint.variables()[std::size_t(i)].alphabet) break;
                digits[i] = 0;
            }
        }
        for (std::size_t cc = 0; cc < cond_cells; ++cc) {
            double z = 0.0;
            for (int s = 0; s < t.var_alphabet; ++s)
                z += t.pmf[cc * std::size_t(t.var_alphabet) + std::size_t(s)];
            if (z > 0.0)
                for (int s = 0; s < t.var_alphabet; ++s)
                    t.pmf[cc * std::size_t(t.var_alphabet) + std::size_t(s)] /= z;
            else
                t.pmf[cc * std::size_t(t.var_alphabet)] = 1.0;  // unreachable context
        }
        return t;
    }
};

// Ancestor own-index digits uniquely determine every codeword; each book's
// conditioning tuple is the mixed-radix number over its closure's own indices.
struct SuitePlan {
    std::vector<int> book_of_var;                 // joint var index -> book pos (-1 none)
    std::vector<std::vector<int>> closures;       // per book: ancestor positions (sorted)
    std::vector<ConditionalTable> conditionals;   // per book
};

std::size_t closure_tuple_index(const CodebookSuite& suite, const SuitePlan& plan, int book,
                                const std::vector<std::size_t>& digits) {
    std::size_t idx = 0;
    for (int anc : plan.closures[std::size_t(book)])
        idx = idx * suite.books[std::size_t(anc)].num_words + digits[std::size_t(anc)];
    return idx;
}

const int* codeword_of(const CodebookSuite& suite, const SuitePlan& plan, int book,
                       const std::vector<std::size_t>& digits) {
    const Codebook& b = suite.books[std::size_t(book)];
    const std::size_t row =
        closure_tuple_index(suite, plan, book, digits) * b.num_words + digits[std::size_t(book)];
    return b.symbols.data() + row * std::size_t(suite.n);
}

double alloc_rate(const RateAllocation& alloc, const Codebook& b) {
    if (b.shared_subset) {
        auto it = alloc.shared_rates.find(*b.shared_subset);
        return it == alloc.shared_rates.end() ? 0.0 : it->second;
    }
    if (b.aux_subset && b.aux_subset->cardinality() == 1) {
        auto it = alloc.private_rates.find(b.aux_subset->members()[0]);
        return it == alloc.private_rates.end() ? 0.0 : it->second;
    }
    return 0.0;  // refinement layers carry no index of their own
}

SuitePlan plan_suite(const AuxModel& model, const CodebookSuite& suite) {
    SuitePlan plan;
    plan.book_of_var.assign(model.joint().variables().size(), -1);
    for (std::size_t i = 0; i < suite.books.size(); ++i)
        plan.book_of_var[std::size_t(suite.books[i].var_index)] = int(i);
    for (std::size_t i = 0; i < suite.books.size(); ++i) {
        std::vector<int> closure;
        for (int direct : suite.books[i].conditioning) {
            closure.push_back(direct);
            for (int anc : plan.closures[std::size_t(direct)]) closure.push_back(anc);
        }
        std::sort(closure.begin(), closure.end());
        closure.erase(std::unique(closure.begin(), closure.end()), closure.end());
        plan.closures.push_back(std::move(closure));
        std::vector<int> cond_vars;
        for (int c : suite.books[i].conditioning)
            cond_vars.push_back(suite.books[std::size_t(c)].var_index);
        plan.conditionals.push_back(
            ConditionalTable::build(model.joint(), suite.books[i].var_index, cond_vars));
    }
    return plan;
}

void check_limits(const AuxModel& model, int n) {
    if (model.total() > kMaxL)
        throw std::invalid_argument("simulator supports L <= 3");
    if (n < 1 || n > kMaxN)
        throw std::invalid_argument("blocklength must be in [1, 12]");
}

// Empirical-type matcher for a fixed variable set, reused across trials.
struct TypeChecker {
    std::vector<int> vars;        // joint variable indices (source first)
    std::vector<int> alphabets;
    std::vector<double> pmf;      // marginal over vars
    std::size_t remaining_cells = 1;  // product of alphabets not yet assigned

    static TypeChecker build(const JointDistribution& joint, const std::vector<int>& vars,
                             std::size_t remaining) {
        TypeChecker t;
        t.vars = vars;
        std::size_t cells = 1;
        for (int v : vars) {
            t.alphabets.push_back(joint.variables()[std::size_t(v)].alphabet);
            cells *= std::size_t(t.alphabets.back());
        }
        t.pmf.assign(cells, 0.0);
        std::vector<int> digits(joint.variables().size(), 0);
        for (std::size_t cell = 0; cell < joint.cells(); ++cell) {
            std::size_t idx = 0;
            for (std::size_t i = 0; i < vars.size(); ++i)
                idx = idx * std::size_t(t.alphabets[i]) +
                      std::size_t(digits[std::size_t(vars[i])]);
            t.pmf[idx] += joint.probs()[cell];
            for (int i = int(digits.size()) - 1; i >= 0; --i) {
                if (++digits[i] < joint.variables()[std::size_t(i)].alphabet) break;
                digits[i] = 0;
            }
        }
        t.remaining_cells = remaining;
        return t;
    }

    // max |empirical - pmf| cell deviation given the rows of symbols
    bool within(const std::vector<const int*>& rows, int n, double eps) const {
        thread_local std::vector<double> counts;
        counts.assign(pmf.size(), 0.0);
        const double w = 1.0 / double(n);
        for (int t = 0; t < n; ++t) {
            std::size_t idx = 0;
            for (std::size_t i = 0; i < rows.size(); ++i)
                idx = idx * std::size_t(alphabets[i]) + std::size_t(rows[i][t]);
            counts[idx] += w;
        }
        // a marginal cell aggregates `remaining_cells` joint cells, each
        // allowed eps of slack, so the sound prune threshold scales by it
        const double budget = eps * double(remaining_cells);
        for (std::size_t i = 0; i < pmf.size(); ++i)
            if (std::abs(counts[i] - pmf[i]) > budget + 1e-12) return false;
        return true;
    }
};

}  // namespace

CodebookSuite generate_codebooks(const AuxModel& model, const RateAllocation& alloc, int n,
                                 std::uint64_t seed) {
    check_limits(model, n);
    const int total = model.total();

    CodebookSuite suite;
    suite.n = n;
    suite.seed = seed;

    // Shared layers: full set first, then widths L-1 .. 2 in canonical order.
    std::vector<std::pair<DescriptionSet, bool>> order;  // (subset, is_shared)
    for (int width = total; width >= 2; --width)
        for (const auto& s : lattice::tier(total, width))
            if (model.shared_index(s) >= 0) order.push_back({s, true});
    // Base layers U_l, then refinement layers by increasing cardinality.
    for (int width = 1; width <= total; ++width)
        for (const auto& k : lattice::tier(total, width))
            if (model.aux_index(k) >= 0) order.push_back({k, false});

    std::size_t total_symbols = 0;
    for (const auto& [subset, is_shared] : order) {
        Codebook book;
        book.var_index = is_shared ? model.shared_index(subset) : model.aux_index(subset);
        book.var_name = model.joint().variables()[std::size_t(book.var_index)].name;
        if (is_shared)
            book.shared_subset = subset;
        else
            book.aux_subset = subset;

        // conditioning books, scheme order
        std::vector<DescriptionSet> cond_subsets;
        std::vector<bool> cond_shared;
        if (is_shared) {
            for (const auto& s :
                 lattice::tier_above_containing(total, subset.cardinality(), subset))
                if (model.shared_index(s) >= 0) {
                    cond_subsets.push_back(s);
                    cond_shared.push_back(true);
                }
        } else if (subset.cardinality() == 1) {
            for (const auto& s : lattice::sharing_sets(total, subset))
                if (model.shared_index(s) >= 0) {
                    cond_subsets.push_back(s);
                    cond_shared.push_back(true);
                }
        } else {
            for (const auto& s : lattice::sharing_sets(total, subset))
                if (model.shared_index(s) >= 0) {
                    cond_subsets.push_back(s);
                    cond_shared.push_back(true);
                }
            for (const auto& k : lattice::nonempty_subsets(total))
                if (k != subset && k.subset_of(subset) && model.aux_index(k) >= 0) {
                    cond_subsets.push_back(k);
                    cond_shared.push_back(false);
                }
        }
        for (std::size_t i = 0; i < cond_subsets.size(); ++i) {
            int pos = -1;
            for (std::size_t b = 0; b < suite.books.size(); ++b) {
                const auto& other = suite.books[b];
                if (cond_shared[i] ? (other.shared_subset && *other.shared_subset == cond_subsets[i])
                                   : (other.aux_subset && *other.aux_subset == cond_subsets[i])) {
                    pos = int(b);
                    break;
                }
            }
            if (pos < 0)
                throw std::runtime_error("codebook generation order violated the lattice");
            book.conditioning.push_back(pos);
        }

        const bool refinement = !is_shared && subset.cardinality() > 1;
        if (refinement) {
            book.num_words = 1;
            book.rate_used = 0.0;
        } else {
            const double rate = alloc_rate(alloc, book);
            if (!(rate >= 0.0) || !std::isfinite(rate))
                throw std::invalid_argument("allocation rates must be finite and >= 0");
            const double words = std::ceil(std::max(0.0, rate) * n);
            if (words > 12.0) throw std::invalid_argument("codebook exceeds 4096 codewords");
            book.num_words = std::size_t(1) << int(words);
            if (book.num_words > kMaxWordsPerBook)
                throw std::invalid_argument("codebook exceeds 4096 codewords");
            book.rate_used = words / double(n);
        }
        suite.books.push_back(std::move(book));
        suite.generation_order.push_back(suite.books.back().var_name);
    }

    SuitePlan plan = plan_suite(model, suite);

    // fill in conditioning-tuple counts, then draw symbols in order
    Rng rng(mix(seed, 0xC0DEB00C));
    for (std::size_t bi = 0; bi < suite.books.size(); ++bi) {
        Codebook& book = suite.books[bi];
        std::size_t tuples = 1;
        for (int anc : plan.closures[bi]) {
            tuples *= suite.books[std::size_t(anc)].num_words;
            if (tuples > kMaxTotalSymbols)
                throw std::invalid_argument("conditioning tuple space exceeds the size limit");
        }
        book.num_cond_tuples = tuples;
        total_symbols += tuples * book.num_words * std::size_t(n);
        if (total_symbols > kMaxTotalSymbols)
            throw std::invalid_argument("codebook suite exceeds the size limit");
        book.symbols.assign(tuples * book.num_words * std::size_t(n), 0);

        const auto& table = plan.conditionals[bi];
        std::vector<std::size_t> digits(suite.books.size(), 0);
        std::vector<double> pmf(std::size_t(table.var_alphabet), 0.0);
        for (std::size_t tup = 0; tup < tuples; ++tup) {
            // unpack the closure tuple into ancestor digits
            std::size_t rem = tup;
            for (int ci = int(plan.closures[bi].size()) - 1; ci >= 0; --ci) {
                const int anc = plan.closures[bi][std::size_t(ci)];
                digits[std::size_t(anc)] = rem % suite.books[std::size_t(anc)].num_words;
                rem /= suite.books[std::size_t(anc)].num_words;
            }
            for (std::size_t w = 0; w < book.num_words; ++w) {
                int* dst =
                    book.symbols.data() + (tup * book.num_words + w) * std::size_t(n);
                for (int t = 0; t < n; ++t) {
                    std::size_t cc = 0;
                    for (std::size_t i = 0; i < book.conditioning.size(); ++i) {
                        const int cb = book.conditioning[i];
                        const int* cw = codeword_of(suite, plan, cb, digits);
                        cc = cc * std::size_t(table.cond_alphabets[i]) + std::size_t(cw[t]);
                    }
                    for (int s = 0; s < table.var_alphabet; ++s)
                        pmf[std::size_t(s)] =
                            table.pmf[cc * std::size_t(table.var_alphabet) + std::size_t(s)];
                    dst[t] = rng.categorical(pmf);
                }
            }
        }
    }
    return suite;
}

std::optional<std::vector<std::size_t>> encode(const std::vector<int>& source_seq,
                                               const AuxModel& model,
                                               const CodebookSuite& suite, double epsilon) {
    if (int(source_seq.size()) != suite.n)
        throw std::invalid_argument("source sequence length must equal the blocklength");
    if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");

    const SuitePlan plan = plan_suite(model, suite);
    const int n = suite.n;

    // free books = own index ranges over more than one word... every
    // non-refinement book, even single-word ones, to keep index order plain
    std::vector<int> free_books, refinement_books;
    for (std::size_t i = 0; i < suite.books.size(); ++i) {
        const auto& b = suite.books[i];
        if (b.aux_subset && b.aux_subset->cardinality() > 1)
            refinement_books.push_back(int(i));
        else
            free_books.push_back(int(i));
    }

    // prefix checkers: vars = X + books[0..d); final checker includes refinements
    std::vector<TypeChecker> prefix(free_books.size() + 1);
    std::vector<int> vars{model.source_index()};
    std::size_t remaining = 1;
    for (std::size_t i = 0; i < suite.books.size(); ++i)
        remaining *= std::size_t(
            model.joint().variables()[std::size_t(suite.books[i].var_index)].alphabet);
    for (std::size_t d = 0; d <= free_books.size(); ++d) {
        prefix[d] = TypeChecker::build(model.joint(), vars, remaining);
        if (d < free_books.size()) {
            const int vi = suite.books[std::size_t(free_books[d])].var_index;
            remaining /= std::size_t(model.joint().variables()[std::size_t(vi)].alphabet);
            vars.push_back(vi);
        }
    }
    std::vector<int> full_vars{model.source_index()};
    for (const auto& b : suite.books) full_vars.push_back(b.var_index);
    const TypeChecker full = TypeChecker::build(model.joint(), full_vars, 1);

    std::vector<std::size_t> digits(suite.books.size(), 0);
    std::vector<const int*> rows{source_seq.data()};

    // depth-first over the free indices, earliest-generated codebook outermost;
    // the first full tuple passing the joint-type test wins
    std::function<bool(std::size_t)> dfs = [&](std::size_t depth) -> bool {
        if (depth == free_books.size()) {
            std::vector<const int*> all_rows{source_seq.data()};
            for (std::size_t i = 0; i < suite.books.size(); ++i)
                all_rows.push_back(codeword_of(suite, plan, int(i), digits));
            return full.within(all_rows, n, epsilon);
        }
        const int book = free_books[depth];
        for (std::size_t w = 0; w < suite.books[std::size_t(book)].num_words; ++w) {
            digits[std::size_t(book)] = w;
            rows.push_back(codeword_of(suite, plan, book, digits));
            const bool viable = prefix[depth + 1].within(rows, n, epsilon);
            if (viable && dfs(depth + 1)) return true;
            rows.pop_back();
        }
        digits[std::size_t(book)] = 0;
        return false;
    };
    if (dfs(0)) return digits;
    return std::nullopt;
}

std::vector<int> decode_subset(const AuxModel& model, const CodebookSuite& suite,
                               const std::vector<std::size_t>& indices,
                               const DescriptionSet& subset, const Decoder& decoder) {
    if (indices.size() != suite.books.size())
        throw std::invalid_argument("index tuple arity must match the suite");
    const SuitePlan plan = plan_suite(model, suite);

    // the subset sees V_K for K in J(subset) and U_K for K inside subset
    auto visible = [&](const Codebook& b) {
        if (b.shared_subset)
            return b.shared_subset->cardinality() > 1 && b.shared_subset->intersects(subset);
        return b.aux_subset->subset_of(subset);
    };
    std::vector<const int*> input_rows;
    for (int vi : decoder.input_indices) {
        const int book = plan.book_of_var[std::size_t(vi)];
        if (book < 0 || !visible(suite.books[std::size_t(book)]))
            throw std::invalid_argument("decoder input not visible to subset");
        input_rows.push_back(codeword_of(suite, plan, book, indices));
    }
    std::vector<int> alphabets;
    for (int vi : decoder.input_indices)
        alphabets.push_back(model.joint().variables()[std::size_t(vi)].alphabet);

    std::vector<int> out(std::size_t(suite.n), 0);
    for (int t = 0; t < suite.n; ++t) {
        std::size_t cell = 0;
        for (std::size_t i = 0; i < input_rows.size(); ++i)
            cell = cell * std::size_t(alphabets[i]) + std::size_t(input_rows[i][t]);
        out[std::size_t(t)] = decoder.table[cell];
    }
    return out;
}

std::vector<std::vector<int>> realized_codewords(const AuxModel& model,
                                                 const CodebookSuite& suite,
                                                 const std::vector<std::size_t>& indices) {
    if (indices.size() != suite.books.size())
        throw std::invalid_argument("index tuple arity must match the suite");
    const SuitePlan plan = plan_suite(model, suite);
    std::vector<std::vector<int>> out;
    for (std::size_t b = 0; b < suite.books.size(); ++b) {
        const int* row = codeword_of(suite, plan, int(b), indices);
        out.emplace_back(row, row + suite.n);
    }
    return out;
}

SimReport run_trials(const AuxModel& model, const RateAllocation& alloc, int n, int trials,
                     double epsilon, std::uint64_t seed, int jobs) {
    check_limits(model, n);
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");

    const auto synthesis = regions::synthesize_decoders(model);

    struct TrialResult {
        bool success = false;
        std::map<DescriptionSet, double> dist;
    };
    std::vector<TrialResult> results;
    results.resize(std::size_t(trials));

    auto run_one = [&](int trial) {
        Rng rng(mix(seed, std::uint64_t(trial) * 2 + 1));
        const CodebookSuite suite =
            generate_codebooks(model, alloc, n, mix(seed, std::uint64_t(trial) * 2));
        // i.i.d. source from the model marginal
        std::vector<double> px(std::size_t(model.source_alphabet()), 0.0);
        {
            const auto marg = model.joint().marginal({model.source_name()});
            px = marg.probs();
        }
        std::vector<int> x_seq(std::size_t(n), 0);
        for (int t = 0; t < n; ++t) x_seq[std::size_t(t)] = rng.categorical(px);

        const auto indices = encode(x_seq, model, suite, epsilon);
        TrialResult res;
        if (!indices) {
            results[std::size_t(trial)] = res;
            return;
        }
        res.success = true;
        for (const auto& dec : synthesis.decoders) {
            const auto xhat = decode_subset(model, suite, *indices, dec.subset, dec);
            const auto& measure = model.distortions().at(dec.subset);
            double d = 0.0;
            for (int t = 0; t < n; ++t)
                d += measure.matrix[std::size_t(x_seq[std::size_t(t)])]
                                   [std::size_t(xhat[std::size_t(t)])];
            res.dist[dec.subset] = d / double(n);
        }
        results[std::size_t(trial)] = res;
    };

    if (jobs <= 0) jobs = int(std::thread::hardware_concurrency());
    jobs = std::max(1, std::min(jobs, trials));
    if (jobs == 1) {
        for (int i = 0; i < trials; ++i) run_one(i);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t)
            pool.emplace_back([&] {
                for (;;) {
                    const int i = next.fetch_add(1);
                    if (i >= trials) return;
                    run_one(i);
                }
            });
        for (auto& th : pool) th.join();
    }

    SimReport report;
    report.n = n;
    report.trials = trials;
    report.epsilon = epsilon;
    report.seed = seed;
    report.allocation_used = alloc;
    report.analytic_distortions = synthesis.distortions;
    int successes = 0;
    for (const auto& r : results) {
        if (!r.success) {
            ++report.encode_failures;
            continue;
        }
        ++successes;
        for (const auto& [s, d] : r.dist) report.empirical_distortions[s] += d;
    }
    if (successes > 0)
        for (auto& [s, d] : report.empirical_distortions) d /= double(successes);
    return report;
}

}  // namespace mdcms::sim
