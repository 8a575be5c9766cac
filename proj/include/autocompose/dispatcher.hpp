#pragma once

#include <condition_variable>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>

#include "autocompose/decision.hpp"

namespace autocompose {

struct SubmissionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ServiceOutcome {
    std::string event_id;
    long long total_cost = 0;  // minor currency units
    std::vector<std::string> served_by;
    int sub_dispatch_count = 0;  // hook invocations used to serve the event
    bool failed = false;
    std::string error;
};

struct Interceptor {
    std::function<void(const ServiceEvent&)> before;
    std::function<void(const ServiceEvent&)> after;
};

// Hook method: serves (its share of) the event, returns the outcome of
// that single invocation.
using HandlerFn = std::function<ServiceOutcome(const ServiceEvent&, const Plan&)>;

struct HandlerRegistration {
    std::string service_id;
    Itemset handled_itemset;
    HandlerFn handler;
    std::vector<Interceptor> interceptors;
};

// Fallback for Remote plans: invoked when a plan target is not registered
// locally. Returns the cost quoted by the peer.
using RemoteInvoker = std::function<long long(const std::string& service_id, const Itemset&)>;

// Single-threaded reactor: FIFO event queue (the synchronous demultiplexer)
// plus handler registry (the initiation dispatcher). submit() and the
// registry mutations may be called from any thread; dispatching happens on
// whichever thread runs dispatch_next()/run().
class Dispatcher {
public:
    explicit Dispatcher(std::vector<FixedRule> rules = default_fixed_rules())
        : rules_(std::move(rules)) {}

    void register_handler(HandlerRegistration reg) {
        if (reg.handled_itemset.empty())
            throw RegistrationError("handled itemset must be non-empty");
        std::lock_guard lock(mutex_);
        if (registry_.contains(reg.service_id))
            throw RegistrationError("duplicate service id: " + reg.service_id);
        registry_.emplace(reg.service_id, std::move(reg));
    }

    void remove_handler(const std::string& service_id) {
        std::lock_guard lock(mutex_);
        if (registry_.erase(service_id) == 0)
            throw RegistrationError("unknown service id: " + service_id);
    }

    bool has_handler(const std::string& service_id) const {
        std::lock_guard lock(mutex_);
        return registry_.contains(service_id);
    }

    std::size_t registry_size() const {
        std::lock_guard lock(mutex_);
        return registry_.size();
    }

    RegistryView registry_view() const {
        std::lock_guard lock(mutex_);
        return build_view(registry_);
    }

    void set_remote_invoker(RemoteInvoker invoker) {
        std::lock_guard lock(mutex_);
        remote_invoker_ = std::move(invoker);
    }

    void submit(ServiceEvent event) {
        {
            std::lock_guard lock(mutex_);
            if (closed_) throw SubmissionError("dispatcher is shut down");
            queue_.push_back(std::move(event));
        }
        queue_cv_.notify_one();
    }

    void shutdown() {
        {
            std::lock_guard lock(mutex_);
            closed_ = true;
        }
        queue_cv_.notify_all();
    }

    std::size_t pending() const {
        std::lock_guard lock(mutex_);
        return queue_.size();
    }

    // Blocks for the next event; nullopt once shut down and drained.
    std::optional<ServiceOutcome> dispatch_next() {
        ServiceEvent event;
        std::map<std::string, HandlerRegistration> snapshot;
        RemoteInvoker remote;
        {
            std::unique_lock lock(mutex_);
            queue_cv_.wait(lock, [&] { return closed_ || !queue_.empty(); });
            if (queue_.empty()) return std::nullopt;
            event = std::move(queue_.front());
            queue_.pop_front();
            snapshot = registry_;  // registry frozen for this event
            remote = remote_invoker_;
        }
        return dispatch(event, snapshot, remote);
    }

    // Drains the queue until shutdown; outcomes go to the sink in FIFO order.
    void run(const std::function<void(const ServiceOutcome&)>& sink) {
        while (auto outcome = dispatch_next()) sink(*outcome);
    }

private:
    static RegistryView build_view(const std::map<std::string, HandlerRegistration>& registry) {
        RegistryView view;
        for (const auto& [id, reg] : registry) {
            view.local_services.insert(id);
            if (reg.handled_itemset.size() >= 2 && id == composite_service_id(reg.handled_itemset))
                view.composite_itemsets.insert(reg.handled_itemset);
        }
        return view;
    }

    // before hooks in order, then the hook method, then after hooks in
    // reverse order; after hooks run even when the handler throws.
    static ServiceOutcome invoke_hook(const HandlerRegistration& reg, const ServiceEvent& event,
                                      const Plan& plan) {
        std::size_t fired = 0;
        for (const auto& ic : reg.interceptors) {
            if (ic.before) ic.before(event);
            ++fired;
        }
        ServiceOutcome result;
        std::exception_ptr failure;
        try {
            result = reg.handler(event, plan);
        } catch (...) {
            failure = std::current_exception();
        }
        for (std::size_t i = fired; i-- > 0;) {
            if (reg.interceptors[i].after) reg.interceptors[i].after(event);
        }
        if (failure) std::rethrow_exception(failure);
        return result;
    }

    ServiceOutcome dispatch(const ServiceEvent& event,
                            const std::map<std::string, HandlerRegistration>& registry,
                            const RemoteInvoker& remote) const {
        ServiceOutcome outcome;
        outcome.event_id = event.event_id;
        try {
            RegistryView view = build_view(registry);
            FixedRule rule = match_rule(event, rules_, view);
            Plan plan = select_plan(rule, event, view);

            auto invoke_target = [&](const std::string& target, const Itemset& portion) {
                auto it = registry.find(target);
                if (it != registry.end()) {
                    ServiceOutcome sub = invoke_hook(it->second, event, plan);
                    outcome.total_cost += sub.total_cost;
                } else if (remote) {
                    outcome.total_cost += remote(target, portion);
                } else {
                    throw ContractError("no handler for service " + target);
                }
                outcome.served_by.push_back(target);
                outcome.sub_dispatch_count += 1;
            };

            if (plan.kind == PlanKind::Bundle) {
                // Bundle quotes are assembled from one sub-dispatch per item.
                for (ItemId i : event.requested_items.members())
                    invoke_target(per_item_service_id(i), Itemset::single(i));
            } else {
                for (const auto& target : plan.target_services)
                    invoke_target(target, event.requested_items);
            }
        } catch (const std::exception& e) {
            outcome.failed = true;
            outcome.error = e.what();
        }
        return outcome;
    }

    mutable std::mutex mutex_;
    std::condition_variable queue_cv_;
    std::deque<ServiceEvent> queue_;
    std::map<std::string, HandlerRegistration> registry_;
    RemoteInvoker remote_invoker_;
    std::vector<FixedRule> rules_;
    bool closed_ = false;
};

}  // namespace autocompose
