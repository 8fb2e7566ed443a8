#pragma once

#include "mss/core/error.hpp"
#include "mss/core/matrix.hpp"

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace mss::ad {

template <typename S>
using Mat = MatrixT<S>;

/// A trainable (or frozen) named tensor with its gradient slot.
template <typename S>
struct Parameter {
    std::string name;
    Mat<S> value;
    Mat<S> grad;
    bool trainable = true;

    void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

/// Owns parameters with stable addresses, iterated in insertion order.
template <typename S>
class ParameterStore {
public:
    ParameterStore() = default;
    ParameterStore(const ParameterStore& other) { *this = other; }
    ParameterStore& operator=(const ParameterStore& other) {
        if (this == &other) return *this;
        params_.clear();
        index_.clear();
        for (const auto& p : other.params_) {
            auto& q = add(p->name, p->value, p->trainable);
            q.grad = p->grad;
        }
        return *this;
    }
    ParameterStore(ParameterStore&&) noexcept = default;
    ParameterStore& operator=(ParameterStore&&) noexcept = default;

    Parameter<S>& add(const std::string& name, Mat<S> value, bool trainable = true) {
        if (index_.count(name)) throw InvalidInput("duplicate parameter name " + name);
        auto p = std::make_unique<Parameter<S>>();
        p->name = name;
        p->value = std::move(value);
        p->trainable = trainable;
        p->zero_grad();
        index_[name] = params_.size();
        params_.push_back(std::move(p));
        return *params_.back();
    }

    [[nodiscard]] bool contains(const std::string& name) const { return index_.count(name) > 0; }

    Parameter<S>& get(const std::string& name) {
        const auto it = index_.find(name);
        if (it == index_.end()) throw InvalidInput("no parameter named " + name);
        return *params_[it->second];
    }
    const Parameter<S>& get(const std::string& name) const {
        const auto it = index_.find(name);
        if (it == index_.end()) throw InvalidInput("no parameter named " + name);
        return *params_[it->second];
    }

    void zero_grad() {
        for (auto& p : params_) p->zero_grad();
    }

    [[nodiscard]] std::size_t size() const { return params_.size(); }

    template <typename F>
    void for_each(F&& f) {
        for (auto& p : params_) f(*p);
    }
    template <typename F>
    void for_each(F&& f) const {
        for (const auto& p : params_) f(static_cast<const Parameter<S>&>(*p));
    }

    [[nodiscard]] std::size_t scalar_count() const {
        std::size_t n = 0;
        for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
        return n;
    }

private:
    std::vector<std::unique_ptr<Parameter<S>>> params_;
    std::map<std::string, std::size_t> index_;
};

template <typename S>
class Tape;

/// Handle to a node on a tape.
template <typename S>
struct Var {
    Tape<S>* tape = nullptr;
    int id = -1;

    [[nodiscard]] const Mat<S>& value() const { return tape->value(id); }
    [[nodiscard]] Index rows() const { return value().rows(); }
    [[nodiscard]] Index cols() const { return value().cols(); }
    [[nodiscard]] bool valid() const { return tape != nullptr && id >= 0; }
};

/// Records a forward computation; backward() replays it in reverse and accumulates
/// gradients into the leaf parameters' slots.
///
/// Nodes that do not depend on any parameter carry no gradient and are skipped.
template <typename S>
class Tape {
public:
    using Backward = std::function<void(Tape&, const Mat<S>& grad)>;

    Var<S> constant(Mat<S> value) { return push(std::move(value), nullptr, false); }

    Var<S> param(Parameter<S>& p) {
        Var<S> v = push(p.value, nullptr, p.trainable);
        nodes_[static_cast<std::size_t>(v.id)].param = &p;
        return v;
    }

    /// Adds an op node. `inputs` decide whether it needs a gradient at all.
    Var<S> op(Mat<S> value, std::initializer_list<Var<S>> inputs, Backward backward) {
        bool needs = false;
        for (const auto& in : inputs) needs = needs || requires_grad(in.id);
        return push(std::move(value), needs ? std::move(backward) : nullptr, needs);
    }

    Var<S> op(Mat<S> value, const std::vector<Var<S>>& inputs, Backward backward) {
        bool needs = false;
        for (const auto& in : inputs) needs = needs || requires_grad(in.id);
        return push(std::move(value), needs ? std::move(backward) : nullptr, needs);
    }

    [[nodiscard]] const Mat<S>& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    [[nodiscard]] bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
    [[nodiscard]] std::size_t size() const { return nodes_.size(); }

    /// grad(id) += delta; no-op for nodes outside the gradient path.
    template <typename Derived>
    void accumulate(int id, const Eigen::MatrixBase<Derived>& delta) {
        auto& n = nodes_[static_cast<std::size_t>(id)];
        if (!n.requires_grad) return;
        if (n.grad.size() == 0) n.grad = Mat<S>::Zero(n.value.rows(), n.value.cols());
        n.grad += delta;
    }

    /// Gradient buffer for in-place row updates. Returns nullptr when not needed.
    Mat<S>* grad_buffer(int id) {
        auto& n = nodes_[static_cast<std::size_t>(id)];
        if (!n.requires_grad) return nullptr;
        if (n.grad.size() == 0) n.grad = Mat<S>::Zero(n.value.rows(), n.value.cols());
        return &n.grad;
    }

    /// Backpropagates from a scalar (1x1) node. Parameter gradients are added to
    /// whatever their slots already hold.
    void backward(Var<S> loss) {
        if (loss.value().size() != 1) throw InvalidInput("backward() needs a scalar loss");
        if (!requires_grad(loss.id)) return;
        nodes_[static_cast<std::size_t>(loss.id)].grad = Mat<S>::Ones(1, 1);
        for (int id = loss.id; id >= 0; --id) {
            auto& n = nodes_[static_cast<std::size_t>(id)];
            if (!n.requires_grad || n.grad.size() == 0) continue;
            // Callbacks only touch nodes with smaller ids, so n stays valid.
            if (n.backward) n.backward(*this, n.grad);
            if (n.param != nullptr) n.param->grad += n.grad;
        }
    }

private:
    struct Node {
        Mat<S> value;
        Mat<S> grad;
        Backward backward;
        Parameter<S>* param = nullptr;
        bool requires_grad = false;
    };

    Var<S> push(Mat<S> value, Backward backward, bool requires_grad) {
        Node n;
        n.value = std::move(value);
        n.backward = std::move(backward);
        n.requires_grad = requires_grad;
        nodes_.push_back(std::move(n));
        return Var<S>{this, static_cast<int>(nodes_.size()) - 1};
    }

    std::vector<Node> nodes_;
};

}  // namespace mss::ad
