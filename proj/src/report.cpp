#include "qmt/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace qmt {

namespace {

std::string escape_json(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

std::string escape_csv(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

} // namespace

std::string format_number(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string render_report_json(const std::vector<CheckRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        out += "{\"suite\":\"" + escape_json(r.suite) + "\",\"check\":\"" +
               escape_json(r.check) + "\",\"anchor\":\"" + escape_json(r.anchor) +
               "\",\"residual\":" + format_number(r.residual) +
               ",\"tolerance\":" + format_number(r.tolerance) +
               ",\"pass\":" + (r.pass ? "true" : "false") + "}\n";
    }
    return out;
}

std::string render_report_csv(const std::vector<CheckRecord>& records) {
    std::string out = "suite,check,anchor,residual,tolerance,pass\n";
    for (const auto& r : records) {
        out += escape_csv(r.suite) + "," + escape_csv(r.check) + "," + escape_csv(r.anchor) +
               "," + format_number(r.residual) + "," + format_number(r.tolerance) + "," +
               (r.pass ? "true" : "false") + "\n";
    }
    return out;
}

std::vector<CheckRecord> parse_report_json(const std::string& text) {
    std::vector<CheckRecord> records;
    std::istringstream stream(text);
    std::string line;
    while (std::getline(stream, line)) {
        if (line.empty()) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument(std::string("malformed report line: ") + e.what());
        }
        CheckRecord r;
        try {
            r.suite = obj.at("suite").get<std::string>();
            r.check = obj.at("check").get<std::string>();
            r.anchor = obj.at("anchor").get<std::string>();
            r.residual = obj.at("residual").get<double>();
            r.tolerance = obj.at("tolerance").get<double>();
            r.pass = obj.at("pass").get<bool>();
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument(std::string("report line misses a field: ") + e.what());
        }
        records.push_back(std::move(r));
    }
    return records;
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write to " + path + " failed");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace qmt
