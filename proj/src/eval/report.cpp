#include "precsel/eval/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "precsel/error.hpp"

namespace precsel {
namespace {

std::string real(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

void check_field(const std::string& s) {
    if (s.find_first_of(",\n\"") != std::string::npos) throw DataError("field '" + s + "' cannot be written to CSV");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

double parse_real(const std::string& s, const std::string& where) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0') throw ParseError(where + ": bad number '" + s + "'");
    return v;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

void write_metrics_csv(const std::filesystem::path& path, const std::vector<EvalReport>& reports,
                       const std::vector<std::string>& label_names) {
    auto out = open_out(path);
    out << "classifier,repetition,matrix_id,accuracy,slowdown,pred_set\n";
    for (const auto& r : reports) {
        check_field(r.classifier);
        for (const auto& p : r.pairs) {
            check_field(p.matrix_id);
            std::string pred;
            for (int l : p.pred) {
                if (!pred.empty()) pred += ';';
                pred += label_names.at(static_cast<std::size_t>(l));
            }
            out << r.classifier << ',' << p.repetition << ',' << p.matrix_id << ',' << real(p.accuracy) << ','
                << real(p.slowdown) << ',' << pred << '\n';
        }
    }
    finish(out, path);
}

std::vector<EvalReport> read_metrics_csv(const std::filesystem::path& path, std::vector<std::string>& label_names,
                                         double slow_threshold) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != "classifier,repetition,matrix_id,accuracy,slowdown,pred_set")
        throw ParseError(path.string() + ": unexpected metrics header");
    std::vector<EvalReport> reports;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(lineno);
        auto f = split(line, ',');
        if (f.size() != 6) throw ParseError(where + ": expected 6 fields");
        auto it = std::find_if(reports.begin(), reports.end(), [&](const EvalReport& r) { return r.classifier == f[0]; });
        if (it == reports.end()) {
            reports.push_back({});
            reports.back().classifier = f[0];
            it = std::prev(reports.end());
        }
        PairMetric p;
        p.repetition = static_cast<int>(parse_real(f[1], where));
        p.matrix_id = f[2];
        p.accuracy = parse_real(f[3], where);
        p.slowdown = parse_real(f[4], where);
        for (const auto& name : split(f[5], ';')) {
            auto li = std::find(label_names.begin(), label_names.end(), name);
            if (li == label_names.end()) {
                label_names.push_back(name);
                li = std::prev(label_names.end());
            }
            p.pred.push_back(static_cast<int>(li - label_names.begin()));
        }
        std::sort(p.pred.begin(), p.pred.end());
        it->pairs.push_back(std::move(p));
    }
    for (auto& r : reports) aggregate(r, slow_threshold);
    return reports;
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<EvalReport>& reports) {
    auto out = open_out(path);
    out << "classifier,p_acc1,p_slow15,mean_pred_size\n";
    for (const auto& r : reports)
        out << r.classifier << ',' << real(r.p_acc1) << ',' << real(r.p_slow15) << ',' << real(r.mean_pred_size) << '\n';
    finish(out, path);
}

void write_repetition_csv(const std::filesystem::path& path, const std::vector<EvalReport>& reports,
                          double slow_threshold) {
    auto out = open_out(path);
    out << "classifier,repetition,p_acc1,p_slow15,mean_pred_size\n";
    for (const auto& r : reports)
        for (const auto& s : per_repetition(r, slow_threshold))
            out << r.classifier << ',' << s.repetition << ',' << real(s.p_acc1) << ',' << real(s.p_slow15) << ','
                << real(s.mean_pred_size) << '\n';
    finish(out, path);
}

void write_scatter_svg(const std::filesystem::path& path, const std::vector<EvalReport>& reports) {
    constexpr double W = 480, H = 480, L = 60, R = 20, T = 20, B = 60;
    auto px = [&](double v) { return L + v * (W - L - R); };
    auto py = [&](double v) { return H - B - v * (H - T - B); };
    auto out = open_out(path);
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
        << ' ' << H << "\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
        << "<g stroke=\"black\" fill=\"none\"><rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R
        << "\" height=\"" << H - T - B << "\"/></g>\n"
        << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int i = 0; i <= 5; ++i) {
        const double v = i / 5.0;
        out << "<text x=\"" << px(v) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << short_real(v).substr(0, 3)
            << "</text>\n<text x=\"" << L - 6 << "\" y=\"" << py(v) + 4 << "\" text-anchor=\"end\">"
            << short_real(v).substr(0, 3) << "</text>\n";
    }
    out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\">P(accuracy = 1)</text>\n"
        << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
        << (T + H - B) / 2 << ")\">P(slowdown &lt; 1.5)</text>\n</g>\n<g class=\"markers\">\n";
    for (const auto& r : reports) {
        const double x = px(r.p_acc1), y = py(r.p_slow15);
        out << "<circle class=\"marker\" cx=\"" << short_real(x) << "\" cy=\"" << short_real(y)
            << "\" r=\"5\" fill=\"steelblue\"><title>" << xml_escape(r.classifier) << "</title></circle>\n"
            << "<text x=\"" << short_real(x + 8) << "\" y=\"" << short_real(y - 8)
            << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(r.classifier) << "</text>\n";
    }
    out << "</g>\n</svg>\n";
    finish(out, path);
}

void emit_report(const std::filesystem::path& dir, const std::vector<EvalReport>& reports,
                 const std::vector<std::string>& label_names, double slow_threshold, bool svg) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    write_metrics_csv(dir / "metrics.csv", reports, label_names);
    write_summary_csv(dir / "summary.csv", reports);
    write_repetition_csv(dir / "repetitions.csv", reports, slow_threshold);
    if (svg) write_scatter_svg(dir / "scatter.svg", reports);
}

}  // namespace precsel
