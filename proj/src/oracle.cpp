#include "matprop/oracle.hpp"

#include <memory>
#include <string>

#include "matprop/error.hpp"

namespace matprop {

EntryOracle::EntryOracle(DenseMatrix hidden, std::optional<std::size_t> budget)
    : rows_(hidden.rows()), cols_(hidden.cols()), field_(hidden.field()), budget_(budget) {
    auto shared = std::make_shared<const DenseMatrix>(std::move(hidden));
    fetch_ = [shared](std::size_t i, std::size_t j) { return (*shared)(i, j); };
}

EntryOracle::EntryOracle(ImplicitMatrix hidden, std::optional<std::size_t> budget)
    : rows_(hidden.rows), cols_(hidden.cols), field_(hidden.field), fetch_(std::move(hidden.entry)), budget_(budget) {
    if (!fetch_) throw InvalidArgument("implicit matrix needs an entry function");
}

void EntryOracle::seal(std::span<const Index> query_set) {
    if (!log_.empty()) throw AlreadyRead("seal() after entries were already read");
    sealed_set_.clear();
    sealed_set_.reserve(query_set.size());
    for (const Index& ix : query_set) {
        if (ix.row >= rows_ || ix.col >= cols_) throw IndexOutOfRange("sealed index outside the hidden matrix");
        sealed_set_.insert(key(ix.row, ix.col));
    }
    sealed_ = true;
}

std::vector<double> EntryOracle::read_entries(std::span<const Index> indices) {
    std::size_t fresh = 0;
    std::unordered_set<std::uint64_t> batch_new;
    for (const Index& ix : indices) {
        if (ix.row >= rows_ || ix.col >= cols_) {
            throw IndexOutOfRange("read (" + std::to_string(ix.row) + "," + std::to_string(ix.col) + ") outside " +
                                  std::to_string(rows_) + "x" + std::to_string(cols_));
        }
        const std::uint64_t k = key(ix.row, ix.col);
        if (sealed_ && !sealed_set_.contains(k)) {
            throw NonAdaptivityViolation("read (" + std::to_string(ix.row) + "," + std::to_string(ix.col) +
                                         ") outside the sealed query set");
        }
        if (!seen_.contains(k) && batch_new.insert(k).second) ++fresh;
    }
    if (budget_ && log_.size() + fresh > *budget_) {
        throw BudgetExceeded("reading " + std::to_string(fresh) + " new entries would exceed the budget of " +
                             std::to_string(*budget_));
    }
    std::vector<double> values;
    values.reserve(indices.size());
    for (const Index& ix : indices) {
        if (seen_.insert(key(ix.row, ix.col)).second) log_.push_back(ix);
        values.push_back(fetch_(ix.row, ix.col));
    }
    return values;
}

double EntryOracle::read(std::size_t row, std::size_t col) {
    const Index ix{row, col};
    return read_entries(std::span<const Index>(&ix, 1)).front();
}

SensingOracle::SensingOracle(DenseMatrix hidden, std::optional<std::size_t> budget)
    : hidden_(std::move(hidden)), budget_(budget) {}

void SensingOracle::charge(std::size_t count) {
    if (budget_ && probes_ + count > *budget_) {
        throw BudgetExceeded("sensing budget of " + std::to_string(*budget_) + " probes exhausted");
    }
    probes_ += count;
}

double SensingOracle::sense(const DenseMatrix& probe) {
    if (probe.rows() != hidden_.rows() || probe.cols() != hidden_.cols()) {
        throw ShapeMismatch("probe shape differs from the hidden matrix");
    }
    if (!(probe.field() == hidden_.field())) throw ShapeMismatch("probe field differs from the hidden matrix");
    charge(1);
    const auto a = hidden_.data();
    const auto x = probe.data();
    if (hidden_.is_real()) {
        double acc = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) acc += x[k] * a[k];
        return acc;
    }
    const std::uint64_t p = hidden_.field().modulus();
    std::uint64_t acc = 0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        acc = (acc + static_cast<std::uint64_t>(x[k]) * static_cast<std::uint64_t>(a[k])) % p;
    }
    return static_cast<double>(acc);
}

double SensingOracle::sense_outer(std::span<const double> left, std::span<const double> right) {
    if (left.size() != hidden_.rows() || right.size() != hidden_.cols()) {
        throw ShapeMismatch("outer-product probe shape differs from the hidden matrix");
    }
    charge(1);
    if (hidden_.is_real()) {
        double acc = 0.0;
        for (std::size_t i = 0; i < hidden_.rows(); ++i) {
            if (left[i] == 0.0) continue;
            double row_acc = 0.0;
            const auto r = hidden_.row(i);
            for (std::size_t j = 0; j < r.size(); ++j) row_acc += r[j] * right[j];
            acc += left[i] * row_acc;
        }
        return acc;
    }
    const std::uint64_t p = hidden_.field().modulus();
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < hidden_.rows(); ++i) {
        const auto li = static_cast<std::uint64_t>(left[i]);
        if (li == 0) continue;
        std::uint64_t row_acc = 0;
        const auto r = hidden_.row(i);
        for (std::size_t j = 0; j < r.size(); ++j) {
            row_acc = (row_acc + static_cast<std::uint64_t>(r[j]) * static_cast<std::uint64_t>(right[j])) % p;
        }
        acc = (acc + li * row_acc) % p;
    }
    return static_cast<double>(acc);
}

std::vector<double> SensingOracle::read_entries(std::span<const Index> indices) {
    for (const Index& ix : indices) {
        if (ix.row >= hidden_.rows() || ix.col >= hidden_.cols()) throw IndexOutOfRange("unit probe outside the hidden matrix");
    }
    charge(indices.size());
    std::vector<double> values;
    values.reserve(indices.size());
    for (const Index& ix : indices) values.push_back(hidden_(ix.row, ix.col));
    return values;
}

}  // namespace matprop
