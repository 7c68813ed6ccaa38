#pragma once

// Independent reference implementations and data generators shared by the
// unit and acceptance suites.

#include "vidmeta/random.h"
#include "vidmeta/string_codec.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace vidmeta::fixture {

inline std::vector<MetadataString> parse_all(const std::vector<std::string>& texts)
{
    std::vector<MetadataString> out;
    for (const std::string& t : texts) {
        out.push_back(parse_string(t));
    }
    return out;
}

// Straightforward re-statement of the vector layout: sorted presence
// strings, sorted discrete key/value strings, sorted continuous path/keys.
struct NaiveVectorizer {
    std::set<std::string> continuous_keys;
    std::vector<std::string> layout;
    std::map<std::string, int> kind;  // 0 count, 1 continuous

    bool is_continuous(const MetadataString& s) const
    {
        return s.key && continuous_keys.count(*s.key) > 0;
    }

    void fit(const std::vector<std::vector<MetadataString>>& corpus)
    {
        std::set<std::string> a;
        std::set<std::string> b;
        std::set<std::string> c;
        for (const auto& strings : corpus) {
            for (const MetadataString& s : strings) {
                if (!s.key) {
                    a.insert(s.text);
                } else if (is_continuous(s)) {
                    c.insert(s.text.substr(0, s.text.find('=')));
                } else {
                    b.insert(s.text);
                }
            }
        }
        for (const auto* set : {&a, &b}) {
            for (const std::string& s : *set) {
                layout.push_back(s);
                kind[s] = 0;
            }
        }
        for (const std::string& s : c) {
            layout.push_back(s);
            kind[s] = 1;
        }
    }

    std::vector<double> transform(const std::vector<MetadataString>& strings) const
    {
        std::map<std::string, double> value;
        for (const MetadataString& s : strings) {
            if (is_continuous(s)) {
                const std::string pk = s.text.substr(0, s.text.find('='));
                const std::string v = unescape(*s.value_text);
                char* end = nullptr;
                const double d = std::strtod(v.c_str(), &end);
                if (!v.empty() && end == v.c_str() + v.size() && std::isfinite(d)) {
                    value[pk] = d;
                }
            } else {
                value[s.text] += 1.0;
            }
        }
        std::vector<double> out;
        for (const std::string& e : layout) {
            auto it = value.find(e);
            out.push_back(it == value.end() ? 0.0 : it->second);
        }
        return out;
    }
};

inline std::vector<MetadataString> random_collection(Rng& rng)
{
    static const char* paths[] = {"moov", "moov/mvhd", "moov/trak1/tkhd", "moov/udta", "ftyp"};
    static const char* keys[] = {"duration", "width", "brand", "\\xA9mod", "flags"};
    static const char* values[] = {"12", "-3.5", "1e3", "0.25", "abc", "", "7x", "600.0", "iPhone"};
    std::vector<std::string> texts;
    const std::size_t n = rng.index(12);
    for (std::size_t i = 0; i < n; ++i) {
        const std::string path = paths[rng.index(std::size(paths))];
        if (rng.uniform01() < 0.35) {
            texts.push_back(path);
        } else {
            texts.push_back(path + "/@" + keys[rng.index(std::size(keys))] + "="
                            + values[rng.index(std::size(values))]);
        }
    }
    return parse_all(texts);
}

inline Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols)
{
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            m(r, c) = rng.uniform01() * 10.0 - 5.0;
        }
    }
    return m;
}

inline double textbook_r(const Eigen::MatrixXd& x, int a, int b)
{
    const int n = static_cast<int>(x.rows());
    double ma = 0;
    double mb = 0;
    for (int i = 0; i < n; ++i) {
        ma += x(i, a);
        mb += x(i, b);
    }
    ma /= n;
    mb /= n;
    double sab = 0;
    double saa = 0;
    double sbb = 0;
    for (int i = 0; i < n; ++i) {
        sab += (x(i, a) - ma) * (x(i, b) - mb);
        saa += (x(i, a) - ma) * (x(i, a) - ma);
        sbb += (x(i, b) - mb) * (x(i, b) - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

// Fraction of feature pairs on which two partitions agree about being
// together or apart.
inline double pair_agreement(const std::vector<int>& a, const std::vector<int>& b)
{
    std::size_t agree = 0;
    std::size_t total = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            agree += ((a[i] == a[j]) == (b[i] == b[j])) ? 1 : 0;
            ++total;
        }
    }
    return total == 0 ? 1.0 : static_cast<double>(agree) / static_cast<double>(total);
}

inline Eigen::MatrixXd block_affinity(const std::vector<int>& sizes, Rng& rng, double noise,
                               std::vector<int>& truth)
{
    int n = 0;
    for (int s : sizes) {
        n += s;
    }
    truth.clear();
    for (std::size_t b = 0; b < sizes.size(); ++b) {
        truth.insert(truth.end(), static_cast<std::size_t>(sizes[b]), static_cast<int>(b));
    }
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            const bool same = truth[static_cast<std::size_t>(i)] == truth[static_cast<std::size_t>(j)];
            const double v = i == j ? 1.0 : same ? 1.0 - noise * rng.uniform01() : noise * rng.uniform01();
            a(i, j) = v;
            a(j, i) = v;
        }
    }
    return a;
}

inline double gaussian(Rng& rng)
{
    // Box-Muller on our own uniform source keeps draws portable.
    const double u1 = 1.0 - rng.uniform01();
    const double u2 = rng.uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

struct Dataset {
    Eigen::MatrixXd x;
    std::vector<std::string> y;
};

inline Dataset gaussian_classes(Rng& rng, const std::vector<Eigen::VectorXd>& means, int per_class, double sd)
{
    const auto d = means[0].size();
    Dataset ds;
    ds.x.resize(static_cast<Eigen::Index>(means.size()) * per_class, d);
    int row = 0;
    for (std::size_t k = 0; k < means.size(); ++k) {
        for (int i = 0; i < per_class; ++i, ++row) {
            for (Eigen::Index c = 0; c < d; ++c) {
                ds.x(row, c) = means[k](c) + sd * gaussian(rng);
            }
            ds.y.push_back("c" + std::to_string(k));
        }
    }
    return ds;
}

inline Eigen::VectorXd vec(std::initializer_list<double> v)
{
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) {
        out(i++) = x;
    }
    return out;
}

// Independent 1/d weighted vote over a brute-force sort.
inline std::string oracle_knn(const Eigen::MatrixXd& pts, const std::vector<std::string>& labels, int lambda,
                       const Eigen::RowVectorXd& q)
{
    std::vector<std::pair<double, std::size_t>> d;
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        d.push_back({std::sqrt((pts.row(i) - q).squaredNorm()), static_cast<std::size_t>(i)});
    }
    std::sort(d.begin(), d.end());
    std::vector<std::string> order;
    for (const std::string& l : labels) {
        if (std::find(order.begin(), order.end(), l) == order.end()) {
            order.push_back(l);
        }
    }
    std::map<std::string, double> vote;
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(lambda), d.size());
    bool exact = d[0].first == 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        if (exact) {
            vote[labels[d[i].second]] += d[i].first == 0.0 ? 1.0 : 0.0;
        } else {
            vote[labels[d[i].second]] += 1.0 / d[i].first;
        }
    }
    std::string best = order[0];
    for (const std::string& l : order) {
        if (vote[l] > vote[best]) {
            best = l;
        }
    }
    return best;
}

}  // namespace vidmeta::fixture
