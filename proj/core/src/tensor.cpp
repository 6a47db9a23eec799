#include "lcdb/tensor.hpp"

#include <algorithm>
#include <unordered_set>

namespace lcdb {

Tensor Tensor::zeros(std::vector<long> shape, bool requires_grad) {
    Tensor t;
    t.impl_ = std::make_shared<TensorImpl>();
    t.impl_->shape = std::move(shape);
    t.impl_->value.assign(shape_numel(t.impl_->shape), 0.0);
    t.impl_->requires_grad = requires_grad;
    return t;
}

Tensor Tensor::full(std::vector<long> shape, double value, bool requires_grad) {
    Tensor t = zeros(std::move(shape), requires_grad);
    std::fill(t.impl_->value.begin(), t.impl_->value.end(), value);
    return t;
}

Tensor Tensor::from_data(std::vector<long> shape, std::vector<double> data,
                         bool requires_grad) {
    check(shape_numel(shape) == static_cast<long>(data.size()),
          "from_data: shape/data size mismatch");
    Tensor t;
    t.impl_ = std::make_shared<TensorImpl>();
    t.impl_->shape = std::move(shape);
    t.impl_->value = std::move(data);
    t.impl_->requires_grad = requires_grad;
    return t;
}

Tensor Tensor::scalar(double value) { return from_data({1}, {value}); }

const std::vector<long>& Tensor::shape() const { return impl_->shape; }
long Tensor::dim(int i) const { return impl_->shape.at(i); }
int Tensor::rank() const { return static_cast<int>(impl_->shape.size()); }
long Tensor::numel() const { return impl_->numel(); }

double* Tensor::data() { return impl_->value.data(); }
const double* Tensor::data() const { return impl_->value.data(); }

double Tensor::item() const {
    check(numel() == 1, "item: tensor is not a scalar");
    return impl_->value[0];
}

bool Tensor::requires_grad() const { return impl_->requires_grad; }
void Tensor::set_requires_grad(bool rg) { impl_->requires_grad = rg; }

double* Tensor::grad() {
    impl_->ensure_grad();
    return impl_->grad.data();
}

const double* Tensor::grad_data() const {
    return impl_->grad.empty() ? nullptr : impl_->grad.data();
}

void Tensor::zero_grad() {
    if (!impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

void Tensor::backward() {
    check(numel() == 1, "backward: root must be a scalar");
    // Topological order by iterative DFS.
    std::vector<TensorImpl*> order;
    std::unordered_set<TensorImpl*> visited;
    struct Frame {
        TensorImpl* node;
        size_t next_parent;
    };
    std::vector<Frame> stack;
    stack.push_back({impl_.get(), 0});
    visited.insert(impl_.get());
    while (!stack.empty()) {
        Frame& f = stack.back();
        if (f.next_parent < f.node->parents.size()) {
            TensorImpl* p = f.node->parents[f.next_parent++].get();
            if (p->requires_grad && !visited.count(p)) {
                visited.insert(p);
                stack.push_back({p, 0});
            }
        } else {
            order.push_back(f.node);
            stack.pop_back();
        }
    }
    impl_->ensure_grad();
    impl_->grad[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        TensorImpl* node = *it;
        if (node->backward_fn) node->backward_fn(*node);
    }
}

Tensor make_node(std::vector<long> shape, const std::vector<Tensor>& parents) {
    Tensor t = Tensor::zeros(std::move(shape));
    bool rg = false;
    for (const Tensor& p : parents) {
        check(p.defined(), "make_node: undefined parent");
        t.impl_->parents.push_back(p.impl_);
        rg = rg || p.requires_grad();
    }
    t.impl_->requires_grad = rg;
    return t;
}

}  // namespace lcdb
