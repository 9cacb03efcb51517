#include "output.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace cli {

namespace {

std::string num(double v, int prec = 17) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

// "Nice" tick positions covering [lo, hi].
std::vector<double> ticks(double lo, double hi, int target = 6) {
    const double span = hi - lo;
    if (!(span > 0.0)) return {lo};
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (m * mag >= raw) {
            step = m * mag;
            break;
        }
    std::vector<double> out;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step)
        out.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
    return out;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

std::string render_svg(const Plot& plot) {
    const double W = 760, H = 500, L = 90, R = 190, T = 45, B = 60;
    const double pw = W - L - R, ph = H - T - B;
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    auto ty = [&](double y) { return plot.log_y ? std::log10(y) : y; };
    for (const auto& s : plot.series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if (plot.log_y && !(s.y[i] > 0.0)) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, ty(s.y[i]));
            ymax = std::max(ymax, ty(s.y[i]));
        }
    if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) {
        ymin -= 0.5 * std::max(1e-12, std::abs(ymin));
        ymax += 0.5 * std::max(1e-12, std::abs(ymax));
    }
    const double pad = 0.05 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return T + ph - (ty(y) - ymin) / (ymax - ymin) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << L + pw / 2 << "\" y=\"25\" text-anchor=\"middle\" font-size=\"15\">"
       << escape(plot.title) << "</text>\n";
    os << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double t : ticks(xmin, xmax)) {
        os << "<line x1=\"" << px(t) << "\" x2=\"" << px(t) << "\" y1=\"" << T + ph << "\" y2=\""
           << T + ph + 5 << "\" stroke=\"black\"/><text x=\"" << px(t) << "\" y=\"" << T + ph + 19
           << "\" text-anchor=\"middle\">" << num(t, 4) << "</text>\n";
    }
    for (double t : ticks(ymin, ymax)) {
        const double yp = T + ph - (t - ymin) / (ymax - ymin) * ph;
        const std::string label = plot.log_y ? "1e" + num(t, 3) : num(t, 4);
        os << "<line x1=\"" << L - 5 << "\" x2=\"" << L << "\" y1=\"" << yp << "\" y2=\"" << yp
           << "\" stroke=\"black\"/><line x1=\"" << L << "\" x2=\"" << L + pw << "\" y1=\"" << yp
           << "\" y2=\"" << yp << "\" stroke=\"#e0e0e0\"/><text x=\"" << L - 8 << "\" y=\"" << yp + 4
           << "\" text-anchor=\"end\">" << label << "</text>\n";
    }
    os << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">"
       << escape(plot.xlabel) << "</text>\n"
       << "<text transform=\"translate(20," << T + ph / 2
       << ") rotate(-90)\" text-anchor=\"middle\">" << escape(plot.ylabel) << "</text>\n";

    for (std::size_t k = 0; k < plot.series.size(); ++k) {
        const Series& s = plot.series[k];
        const char* col = kColors[k % std::size(kColors)];
        std::ostringstream pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if (plot.log_y && !(s.y[i] > 0.0)) continue;
            pts << num(px(s.x[i]), 6) << ',' << num(py(s.y[i]), 6) << ' ';
        }
        os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\""
           << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"" << pts.str() << "\"/>\n";
        if (!s.err.empty() && !plot.log_y)
            for (std::size_t i = 0; i < s.x.size() && i < s.err.size(); ++i) {
                if (!std::isfinite(s.err[i]) || !std::isfinite(s.y[i])) continue;
                os << "<line x1=\"" << px(s.x[i]) << "\" x2=\"" << px(s.x[i]) << "\" y1=\""
                   << py(s.y[i] - s.err[i]) << "\" y2=\"" << py(s.y[i] + s.err[i]) << "\" stroke=\""
                   << col << "\" stroke-opacity=\"0.4\"/>\n";
            }
        const double ly = T + 14 + 18.0 * static_cast<double>(k);
        os << "<line x1=\"" << L + pw + 12 << "\" x2=\"" << L + pw + 40 << "\" y1=\"" << ly - 4
           << "\" y2=\"" << ly - 4 << "\" stroke=\"" << col << "\" stroke-width=\"2\""
           << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/><text x=\"" << L + pw + 46
           << "\" y=\"" << ly << "\">" << escape(s.name) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string render_csv(const Table& t) {
    std::ostringstream os;
    for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
    os << '\n';
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << num(r[i]);
        os << '\n';
    }
    return os.str();
}

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr))
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

ArtifactWriter::ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir_.string());
}

void ArtifactWriter::write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    os << content;
    if (!os) throw std::runtime_error("write failed: " + path.string());
    artifacts_.push_back({{"file", name}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
}

void ArtifactWriter::write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

}  // namespace cli
