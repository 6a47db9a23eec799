#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace lcdb {

// Reverse-mode autodiff tensor. Values and gradients are double precision so
// finite-difference checks are meaningful. Rank is at most 4 in practice
// (N,C,H,W), but the shape is a plain vector.
struct TensorImpl;

class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(std::vector<long> shape, bool requires_grad = false);
    static Tensor full(std::vector<long> shape, double value, bool requires_grad = false);
    static Tensor from_data(std::vector<long> shape, std::vector<double> data,
                            bool requires_grad = false);
    static Tensor scalar(double value);

    bool defined() const { return static_cast<bool>(impl_); }

    const std::vector<long>& shape() const;
    long dim(int i) const;
    int rank() const;
    long numel() const;

    double* data();
    const double* data() const;
    double item() const;  // numel()==1 only

    bool requires_grad() const;
    void set_requires_grad(bool rg);

    // Gradient buffer; allocated (zeroed) on first access.
    double* grad();
    const double* grad_data() const;  // nullptr if never touched
    void zero_grad();

    // Backpropagate from this tensor; it must be a scalar.
    void backward();

    std::shared_ptr<TensorImpl> impl_;
};

struct TensorImpl {
    std::vector<long> shape;
    std::vector<double> value;
    std::vector<double> grad;  // empty until needed
    bool requires_grad = false;
    std::vector<std::shared_ptr<TensorImpl>> parents;
    std::function<void(TensorImpl&)> backward_fn;

    long numel() const { return static_cast<long>(value.size()); }
    void ensure_grad() {
        if (grad.empty()) grad.assign(value.size(), 0.0);
    }
};

// Result node wired to its parents; caller fills value and backward_fn.
Tensor make_node(std::vector<long> shape, const std::vector<Tensor>& parents);

inline long shape_numel(const std::vector<long>& s) {
    long n = 1;
    for (long d : s) n *= d;
    return n;
}

inline void check(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace lcdb
