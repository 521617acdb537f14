#pragma once

// Text checkpoints for fitted detectors. Every real number is written as a
// C99 hexfloat, so a saved and reloaded model scores bit-identically. The
// layout is described in docs/checkpoint-format.md.

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "anoscope/deep.hpp"
#include "anoscope/detector.hpp"

namespace anoscope::checkpoint {

/// Writes named, typed entries one per line.
class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void text(const std::string& name, const std::string& value);
    void integer(const std::string& name, long long value);
    void scalar(const std::string& name, double value);
    void vector(const std::string& name, const Vector& v);
    void row(const std::string& name, const RowVector& v) { vector(name, v.transpose()); }
    void matrix(const std::string& name, const Matrix& m);
    void series(const std::string& name, const std::vector<double>& v);
    void indices(const std::string& name, const std::vector<Index>& v);
    void kernel(const std::string& prefix, const KernelSpec& k);
    void network(const std::string& prefix, const deep::MLP& net);

private:
    std::ostream& out_;
};

/// Parses a whole checkpoint body into entries addressable by name.
class Reader {
public:
    explicit Reader(std::istream& in);

    bool has(const std::string& name) const { return entries_.count(name) > 0; }
    std::string text(const std::string& name) const;
    long long integer(const std::string& name) const;
    double scalar(const std::string& name) const;
    Vector vector(const std::string& name) const;
    RowVector row(const std::string& name) const { return vector(name).transpose(); }
    Matrix matrix(const std::string& name) const;
    std::vector<double> series(const std::string& name) const;
    std::vector<Index> indices(const std::string& name) const;
    KernelSpec kernel(const std::string& prefix) const;
    deep::MLP network(const std::string& prefix) const;

private:
    struct Entry {
        std::string kind;
        Index rows = 0;
        Index cols = 0;
        std::vector<std::string> tokens;
    };
    const Entry& get(const std::string& name, const std::string& kind) const;

    std::map<std::string, Entry> entries_;
};

void save_model(std::ostream& out, const DetectorModel& model);
DetectorModel load_model(std::istream& in);

void save_model(const std::string& path, const DetectorModel& model);
DetectorModel load_model(const std::string& path);

}  // namespace anoscope::checkpoint
