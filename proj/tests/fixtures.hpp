#pragma once

#include "botwin/flow.hpp"

#include <random>
#include <string>

namespace fixture {

inline botwin::FlowRecord flow(double start, double duration, botwin::Tag tag = botwin::Tag::Normal,
                               botwin::Protocol proto = botwin::Protocol::TCP, std::string src = "10.0.0.1",
                               std::string dst = "147.32.84.1") {
    botwin::FlowRecord f;
    f.start_time = start;
    f.duration = duration;
    f.tag = tag;
    f.proto = proto;
    f.proto_raw = std::string(botwin::to_string(proto));
    f.src_addr = std::move(src);
    f.dst_addr = std::move(dst);
    f.src_port = 40000;
    f.dst_port = 80;
    f.direction = "->";
    f.state = "S_RA";
    f.tot_pkts = 2;
    f.tot_bytes = 120;
    f.src_bytes = 60;
    f.label = tag == botwin::Tag::Botnet ? "flow=From-Botnet-V42-TCP" : "flow=To-Normal-V42-TCP";
    return f;
}

// Arbitrary record mixing address classes, protocols, states, optional ports and tags.
inline botwin::FlowRecord random_flow(std::mt19937_64& rng) {
    static const char* addrs[] = {"10.0.0.1", "10.0.0.2", "147.32.84.165", "147.32.84.10", "192.168.1.4",
                                  "230.1.1.1", "127.0.0.1", "fe80::1", "200.1.1.1", "1.2.3.4"};
    static const char* states[] = {"S_RA", "CON", "FSPA_FSPA", "ECO", "INT"};
    std::uniform_int_distribution<int> pick(0, 9), state(0, 4), proto(0, 3), port(0, 2100), small(0, 3);
    botwin::FlowRecord f;
    f.src_addr = addrs[pick(rng)];
    f.dst_addr = addrs[pick(rng)];
    f.proto = static_cast<botwin::Protocol>(proto(rng));
    f.state = states[state(rng)];
    if (small(rng) != 0) f.src_port = port(rng) * (small(rng) + 1);
    if (small(rng) != 0) f.dst_port = port(rng);
    f.duration = small(rng) * 0.5;
    f.tot_pkts = 1 + small(rng);
    f.tot_bytes = f.tot_pkts * (60 + 10 * small(rng));
    f.src_bytes = f.tot_bytes / (1 + small(rng));
    f.tag = static_cast<botwin::Tag>(small(rng));
    return f;
}

}  // namespace fixture
