// csv.hpp
//
// Plain-text outputs shared by the command-line tool and the experiment
// drivers.  Every floating-point value is printed with %.17g so files are
// byte-identical across reruns and round-trip exactly through the readers.
//
// Formats (one header line each):
//   field   theta_index,sigma_index,component,value   (sigma_index -1 on the curve)
//   trace   t,l2sq,cum_dirichlet,cum_l4,sup
//   sweep   epsilon,check_name,error_value
//   rates   check_name,slope,intercept,max_residual,points_used,ok
//   defects epsilon,quantity_name,raw_value,compensated_ratio
//   hygiene check_name,reference_value,coarse_value,relative_change
#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "thinflow/ginzburg_landau.hpp"
#include "thinflow/grid.hpp"
#include "thinflow/rates.hpp"

namespace thinflow {

inline void write_field_csv(std::ostream& os, const ThinField& u) {
    os << "theta_index,sigma_index,component,value\n";
    for (int c = 0; c < u.components; ++c)
        for (int j = 0; j < u.m_theta; ++j)
            for (int k = 0; k < u.m_sigma; ++k)
                os << j << ',' << k << ',' << c << ',' << format_double(u.at(c, j, k)) << '\n';
}

inline void write_field_csv(std::ostream& os, const SurfaceField& v) {
    os << "theta_index,sigma_index,component,value\n";
    for (int c = 0; c < v.components; ++c)
        for (int j = 0; j < v.m_theta; ++j)
            os << j << ",-1," << c << ',' << format_double(v.at(c, j)) << '\n';
}

// A field loaded from disk; thin when any row carries sigma_index >= 0.
struct LoadedField {
    bool thin = false;
    ThinField band;
    SurfaceField curve;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    cells.push_back(cur);
    return cells;
}

inline double parse_double_cell(const std::string& s, const char* what) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(std::string("csv: bad ") + what + " value '" + s + "'");
    }
}

inline long parse_long_cell(const std::string& s, const char* what) {
    try {
        size_t pos = 0;
        long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(std::string("csv: bad ") + what + " index '" + s + "'");
    }
}

}  // namespace detail

inline LoadedField read_field_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("csv: empty field file");
    struct Row {
        int j, k, c;
        double v;
    };
    std::vector<Row> rows;
    int max_j = -1, max_k = -1, max_c = -1;
    bool thin = false;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto cells = detail::split_csv_line(line);
        if (cells.size() != 4) throw ConfigError("csv: field rows need 4 columns, got '" + line + "'");
        Row r;
        r.j = static_cast<int>(detail::parse_long_cell(cells[0], "theta"));
        r.k = static_cast<int>(detail::parse_long_cell(cells[1], "sigma"));
        r.c = static_cast<int>(detail::parse_long_cell(cells[2], "component"));
        r.v = detail::parse_double_cell(cells[3], "field");
        if (r.j < 0 || r.c < 0 || r.k < -1) throw ConfigError("csv: negative field index");
        thin = thin || r.k >= 0;
        max_j = std::max(max_j, r.j);
        max_k = std::max(max_k, r.k);
        max_c = std::max(max_c, r.c);
        rows.push_back(r);
    }
    if (rows.empty()) throw ConfigError("csv: field file has no data rows");

    LoadedField out;
    out.thin = thin;
    int M = max_j + 1, C = max_c + 1;
    if (thin) {
        int S = max_k + 1;
        out.band = ThinField(C, M, S);
        std::vector<char> seen(out.band.data.size(), 0);
        for (const Row& r : rows) {
            if (r.k < 0) throw ConfigError("csv: mixed band and curve rows in one field file");
            size_t idx = out.band.index(r.c, r.j, r.k);
            if (seen[idx]) throw ConfigError("csv: duplicate field entry");
            seen[idx] = 1;
            out.band.data[idx] = r.v;
        }
        for (char s : seen)
            if (!s) throw ConfigError("csv: field file does not cover the full grid");
    } else {
        out.curve = SurfaceField(C, M);
        std::vector<char> seen(out.curve.data.size(), 0);
        for (const Row& r : rows) {
            size_t idx = static_cast<size_t>(r.c) * M + r.j;
            if (seen[idx]) throw ConfigError("csv: duplicate field entry");
            seen[idx] = 1;
            out.curve.data[idx] = r.v;
        }
        for (char s : seen)
            if (!s) throw ConfigError("csv: field file does not cover the full grid");
    }
    return out;
}

inline void write_trace_csv(std::ostream& os, const EnergyTrace& trace) {
    os << "t,l2sq,cum_dirichlet,cum_l4,sup\n";
    for (const auto& r : trace.rows)
        os << format_double(r.t) << ',' << format_double(r.l2sq) << ','
           << format_double(r.cum_dirichlet) << ',' << format_double(r.cum_l4) << ','
           << format_double(r.sup) << '\n';
}

struct SweepRow {
    double epsilon;
    std::string check_name;
    double error_value;
};

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "epsilon,check_name,error_value\n";
    for (const auto& r : rows)
        os << format_double(r.epsilon) << ',' << r.check_name << ','
           << format_double(r.error_value) << '\n';
}

struct RateRow {
    std::string check_name;
    RateFit fit;
};

inline void write_rates_csv(std::ostream& os, const std::vector<RateRow>& rows) {
    os << "check_name,slope,intercept,max_residual,points_used,ok\n";
    for (const auto& r : rows)
        os << r.check_name << ',' << format_double(r.fit.slope) << ','
           << format_double(r.fit.intercept) << ',' << format_double(r.fit.max_residual) << ','
           << r.fit.points_used << ',' << (r.fit.ok ? 1 : 0) << '\n';
}

struct DefectRow {
    double epsilon;
    std::string quantity_name;
    double raw_value;
    double compensated_ratio;
};

inline void write_defects_csv(std::ostream& os, const std::vector<DefectRow>& rows) {
    os << "epsilon,quantity_name,raw_value,compensated_ratio\n";
    for (const auto& r : rows)
        os << format_double(r.epsilon) << ',' << r.quantity_name << ','
           << format_double(r.raw_value) << ',' << format_double(r.compensated_ratio) << '\n';
}

struct HygieneRow {
    std::string check_name;
    double reference_value;
    double coarse_value;
    double relative_change;
};

inline void write_hygiene_csv(std::ostream& os, const std::vector<HygieneRow>& rows) {
    os << "check_name,reference_value,coarse_value,relative_change\n";
    for (const auto& r : rows)
        os << r.check_name << ',' << format_double(r.reference_value) << ','
           << format_double(r.coarse_value) << ',' << format_double(r.relative_change) << '\n';
}

}  // namespace thinflow
