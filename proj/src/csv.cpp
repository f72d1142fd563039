#include "penn/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "penn/serialize.hpp"

namespace penn {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

bool is_missing_marker(const std::string& field) {
    return field.empty() || field == "NaN" || field == "nan";
}

double parse_number(const std::string& field, std::size_t line_no) {
    double v;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw std::invalid_argument("csv: bad number '" + field + "' on line " +
                                    std::to_string(line_no));
    }
    return v;
}

}  // namespace

void write_dataset_csv(const std::filesystem::path& path, const PartialMatrix& x,
                       const Vector& y) {
    if (x.rows != y.size()) throw std::invalid_argument("csv: row count mismatch");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    for (std::size_t j = 0; j < x.cols; ++j) out << "x_" << (j + 1) << ',';
    for (std::size_t j = 0; j < x.cols; ++j) out << "omega_" << (j + 1) << ',';
    out << "y\n";
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t j = 0; j < x.cols; ++j) {
            if (x.is_observed(i, j)) out << format_double(x.values(i, j));
            out << ',';
        }
        for (std::size_t j = 0; j < x.cols; ++j) {
            out << (x.is_observed(i, j) ? '1' : '0') << ',';
        }
        out << format_double(y[i]) << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_dataset_csv(const std::filesystem::path& path, const SampleSet& rows) {
    write_dataset_csv(path, mask_rows(rows.x, rows.omega), rows.y);
}

DataFile read_dataset_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("csv: empty file " + path.string());
    const auto header = split_line(line);

    std::size_t d = 0;
    while (d < header.size() && header[d] == "x_" + std::to_string(d + 1)) ++d;
    if (d == 0 || header.size() != 2 * d + 1 || header.back() != "y") {
        throw std::invalid_argument("csv: unexpected header in " + path.string());
    }
    for (std::size_t j = 0; j < d; ++j) {
        if (header[d + j] != "omega_" + std::to_string(j + 1)) {
            throw std::invalid_argument("csv: unexpected header in " + path.string());
        }
    }

    std::vector<std::vector<std::string>> raw;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_line(line);
        if (fields.size() != 2 * d + 1) {
            throw std::invalid_argument("csv: wrong field count on line " +
                                        std::to_string(line_no));
        }
        raw.push_back(std::move(fields));
    }

    DataFile data;
    data.x = PartialMatrix(raw.size(), d);
    data.y.resize(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto& fields = raw[i];
        for (std::size_t j = 0; j < d; ++j) {
            const bool observed = fields[d + j] == "1";
            if (!observed && fields[d + j] != "0") {
                throw std::invalid_argument("csv: omega field must be 0 or 1 on line " +
                                            std::to_string(i + 2));
            }
            if (observed) {
                if (is_missing_marker(fields[j])) {
                    throw std::invalid_argument(
                        "csv: observed cell is empty on line " + std::to_string(i + 2));
                }
                data.x.set(i, j, parse_number(fields[j], i + 2));
            } else {
                if (!is_missing_marker(fields[j])) {
                    throw std::invalid_argument(
                        "csv: unobserved cell carries a value on line " + std::to_string(i + 2));
                }
                data.x.set_missing(i, j);
            }
        }
        data.y[i] = parse_number(fields[2 * d], i + 2);
    }
    return data;
}

std::string file_hash(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[8192];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
        if (!in) break;
    }
    std::ostringstream hex;
    hex << "fnv1a64:" << std::hex << h;
    return hex.str();
}

}  // namespace penn
