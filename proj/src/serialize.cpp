#include "penn/serialize.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace penn {

namespace {

void require_format(const Json& doc, const std::string& format) {
    if (!doc.is_object() || doc.value("format", "") != format) {
        throw std::invalid_argument("document is not a '" + format + "' document");
    }
    if (doc.value("version", 0) != 1) {
        throw std::invalid_argument("unsupported document version");
    }
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument(std::string("serialize: non-finite value in ") + what);
    }
}

std::vector<std::uint8_t> flat_mask(const Mlp& net) {
    std::vector<std::uint8_t> flat;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        flat.insert(flat.end(), net.mask->w[l].begin(), net.mask->w[l].end());
        flat.insert(flat.end(), net.mask->b[l].begin(), net.mask->b[l].end());
    }
    return flat;
}

}  // namespace

Json to_json(const Mlp& net) {
    Json doc;
    doc["format"] = "penn-mlp";
    doc["version"] = 1;
    doc["depth"] = net.arch.depth;
    doc["widths"] = net.arch.widths;
    Vector theta = param_vector(net);
    for (double v : theta) require_finite(v, "network parameters");
    doc["params"] = theta;
    if (net.mask) {
        doc["mask"] = flat_mask(net);
    } else {
        doc["mask"] = nullptr;
    }
    return doc;
}

Mlp mlp_from_json(const Json& doc) {
    require_format(doc, "penn-mlp");
    Architecture arch(doc.at("depth").get<int>(), doc.at("widths").get<std::vector<int>>());
    Mlp net = Mlp::zeros(arch);
    const auto params = doc.at("params").get<Vector>();
    set_param_vector(net, params);
    if (!doc.at("mask").is_null()) {
        auto flat = doc.at("mask").get<std::vector<std::uint8_t>>();
        if (flat.size() != arch.param_count()) {
            throw std::invalid_argument("mlp document: mask length mismatch");
        }
        net.ensure_mask();
        std::size_t pos = 0;
        for (std::size_t l = 0; l < net.weights.size(); ++l) {
            std::copy_n(flat.begin() + pos, net.mask->w[l].size(), net.mask->w[l].begin());
            pos += net.mask->w[l].size();
            std::copy_n(flat.begin() + pos, net.mask->b[l].size(), net.mask->b[l].begin());
            pos += net.mask->b[l].size();
        }
    }
    return net;
}

Json to_json(const Penn& net) {
    Json doc;
    doc["format"] = "penn-penn";
    doc["version"] = 1;
    doc["budget"] = net.budget.s;
    doc["f1"] = to_json(net.f1);
    doc["f2"] = to_json(net.f2);
    doc["f3"] = to_json(net.f3);
    return doc;
}

Penn penn_from_json(const Json& doc) {
    require_format(doc, "penn-penn");
    Penn net;
    net.budget.s = doc.at("budget").get<std::size_t>();
    net.f1 = mlp_from_json(doc.at("f1"));
    net.f2 = mlp_from_json(doc.at("f2"));
    net.f3 = mlp_from_json(doc.at("f3"));
    net.validate();
    return net;
}

Json to_json(const SeparationCertificate& cert) {
    Json doc;
    doc["format"] = "penn-certificate";
    doc["version"] = 1;
    doc["network"] = to_json(cert.network);
    doc["anchors"] = cert.anchors;
    doc["margin"] = cert.margin;
    return doc;
}

SeparationCertificate certificate_from_json(const Json& doc) {
    require_format(doc, "penn-certificate");
    SeparationCertificate cert;
    cert.network = mlp_from_json(doc.at("network"));
    cert.anchors = doc.at("anchors").get<std::vector<Vector>>();
    cert.margin = doc.at("margin").get<double>();
    return cert;
}

Json to_json(const PatternPartition& partition) {
    Json doc;
    doc["format"] = "penn-partition";
    doc["version"] = 1;
    doc["d"] = partition.d;
    Json cells = Json::array();
    for (const auto& cell : partition.cells) {
        Json strings = Json::array();
        for (Pattern p : cell) strings.push_back(pattern_to_string(p, partition.d));
        cells.push_back(strings);
    }
    doc["cells"] = cells;
    if (!partition.probabilities.empty()) doc["probabilities"] = partition.probabilities;
    return doc;
}

PatternPartition partition_from_json(const Json& doc) {
    require_format(doc, "penn-partition");
    PatternPartition partition;
    partition.d = doc.at("d").get<int>();
    for (const auto& cell : doc.at("cells")) {
        std::vector<Pattern> patterns;
        for (const auto& s : cell) {
            const auto str = s.get<std::string>();
            if (str.size() != static_cast<std::size_t>(partition.d)) {
                throw std::invalid_argument("partition document: pattern '" + str +
                                            "' has wrong length");
            }
            patterns.push_back(pattern_from_string(str));
        }
        partition.cells.push_back(std::move(patterns));
    }
    if (doc.contains("probabilities")) {
        partition.probabilities = doc.at("probabilities").get<Vector>();
    }
    partition.validate();
    return partition;
}

Json to_json(const MetricsRecord& record) {
    Json doc;
    doc["label"] = record.label;
    doc["n_test"] = record.n_test;
    doc["mse"] = record.mse;
    if (record.has_oracle) {
        doc["excess_risk"] = record.excess_risk;
        doc["excess_se"] = record.excess_se;
    }
    if (std::isfinite(record.mce)) doc["mce"] = record.mce;
    if (std::isfinite(record.puv)) doc["puv"] = record.puv;
    return doc;
}

Json to_json(const ComparisonSummary& summary) {
    Json doc;
    doc["metric"] = summary.metric;
    doc["n_seeds"] = summary.n_seeds;
    doc["penn_wins"] = summary.penn_wins;
    doc["differences"] = summary.differences;
    doc["median_difference"] = summary.median_difference;
    auto box = [](const BoxStats& b) {
        return Json{{"min", b.min}, {"q1", b.q1}, {"median", b.median}, {"q3", b.q3},
                    {"max", b.max}};
    };
    doc["penn_box"] = box(summary.penn_box);
    doc["nn_box"] = box(summary.nn_box);
    return doc;
}

template <typename Net>
Json train_report_to_json(const TrainReport<Net>& report) {
    Json doc;
    doc["format"] = "penn-train-report";
    doc["version"] = 1;
    doc["selected_lambda"] = report.selected_lambda;
    doc["selected_val_loss"] = report.selected_val_loss;
    Json branches = Json::array();
    for (const auto& lr : report.per_lambda) {
        Json b;
        b["lambda"] = lr.lambda;
        b["stop_epoch"] = lr.stop_epoch;
        b["val_loss"] = lr.val_loss;
        b["train_curve"] = lr.curve.train_loss;
        b["val_curve"] = lr.curve.val_loss;
        b["network"] = to_json(lr.network);
        branches.push_back(std::move(b));
    }
    doc["per_lambda"] = std::move(branches);
    return doc;
}

template Json train_report_to_json<Mlp>(const TrainReport<Mlp>&);
template Json train_report_to_json<Penn>(const TrainReport<Penn>&);

void save_json(const std::filesystem::path& path, const Json& doc) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

Json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    Json doc;
    in >> doc;
    return doc;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

}  // namespace penn
