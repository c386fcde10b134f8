#include "botwin/error.hpp"
#include "botwin/flow.hpp"
#include "botwin/harness.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace botwin;

namespace {

const std::string kHeader(kBinetflowHeader);
const std::string kSample =
    "2011/08/10 09:46:53.047277,1.026539,tcp,94.44.127.113,1577,->,147.32.84.59,6881,S_RA,0,0,4,276,156,"
    "flow=Background-TCP-Established";

ParsedFlows parse(const std::string& body) {
    std::istringstream in(kHeader + "\n" + body);
    return parse_binetflow(in, 4);
}

}  // namespace

TEST_CASE("sample line parses field by field") {
    const auto parsed = parse(kSample + "\n");
    REQUIRE(parsed.flows.size() == 1);
    const FlowRecord& r = parsed.flows[0];
    CHECK(r.start_time == 0.0);
    CHECK(r.duration == 1.026539);
    CHECK(r.proto == Protocol::TCP);
    CHECK(r.src_addr == "94.44.127.113");
    CHECK(r.src_port == 1577);
    CHECK(r.direction == "->");
    CHECK(r.dst_addr == "147.32.84.59");
    CHECK(r.dst_port == 6881);
    CHECK(r.state == "S_RA");
    CHECK(r.stos == 0);
    CHECK(r.tot_pkts == 4);
    CHECK(r.tot_bytes == 276);
    CHECK(r.src_bytes == 156);
    CHECK(r.tag == Tag::Background);
    CHECK(r.scenario_id == 4);
    CHECK(parsed.stats.epoch_us == *parse_timestamp("2011/08/10 09:46:53.047277"));
}

TEST_CASE("empty port field is absent and the record is kept") {
    const auto parsed =
        parse("2011/08/10 09:46:53.1,0,icmp,147.32.84.165,,->,8.8.8.8,,ECO,0,,1,98,98,flow=From-Botnet-V44-ICMP\n");
    REQUIRE(parsed.flows.size() == 1);
    CHECK_FALSE(parsed.flows[0].src_port.has_value());
    CHECK_FALSE(parsed.flows[0].dst_port.has_value());
    CHECK_FALSE(parsed.flows[0].dtos.has_value());
    CHECK(parsed.flows[0].proto == Protocol::ICMP);
}

TEST_CASE("malformed lines are skipped and counted") {
    const std::string bad = "2011/08/10 09:46:54.0,0.5,tcp,1.1.1.1,1,->,2.2.2.2,2,S_,0,0,4,abc,10,flow=x\n";
    const auto parsed = parse(kSample + "\n" + bad + kSample + "\n");
    CHECK(parsed.stats.total == 3);
    CHECK(parsed.stats.kept == 2);
    CHECK(parsed.stats.skipped == 1);
    CHECK(parsed.stats.total == parsed.stats.kept + parsed.stats.skipped);
}

TEST_CASE("invariant violations are malformed") {
    SUBCASE("src_bytes above tot_bytes") {
        const auto p = parse(kSample + "\n2011/08/10 09:46:54.0,0,tcp,1.1.1.1,1,->,2.2.2.2,2,S_,0,0,1,10,11,x\n");
        CHECK(p.stats.skipped == 1);
    }
    SUBCASE("bytes without packets") {
        const auto p = parse(kSample + "\n2011/08/10 09:46:54.0,0,tcp,1.1.1.1,1,->,2.2.2.2,2,S_,0,0,0,10,5,x\n");
        CHECK(p.stats.skipped == 1);
    }
    SUBCASE("negative duration") {
        const auto p = parse(kSample + "\n2011/08/10 09:46:54.0,-1,tcp,1.1.1.1,1,->,2.2.2.2,2,S_,0,0,1,10,5,x\n");
        CHECK(p.stats.skipped == 1);
    }
    SUBCASE("bad timestamp") {
        const auto p = parse(kSample + "\n2011-08-10T09:46:54,0,tcp,1.1.1.1,1,->,2.2.2.2,2,S_,0,0,1,10,5,x\n");
        CHECK(p.stats.skipped == 1);
    }
}

TEST_CASE("header and corruption errors") {
    std::istringstream no_header("");
    CHECK_THROWS_AS(parse_binetflow(no_header), FormatError);
    std::istringstream wrong_header("Foo,Bar\n1,2\n");
    CHECK_THROWS_AS(parse_binetflow(wrong_header), FormatError);
    std::istringstream mostly_bad(kHeader + "\n" + kSample + "\nx\ny\nz\n");
    CHECK_THROWS_AS(parse_binetflow(mostly_bad), CorruptInputError);
    CHECK_THROWS_AS(parse_binetflow_file("/nonexistent/file.binetflow"), IngestError);
}

TEST_CASE("epoch is the minimum start time even when lines are unsorted") {
    const auto parsed = parse(
        "2011/08/10 09:46:55.000000,0,udp,1.1.1.1,53,<->,2.2.2.2,53,CON,0,0,2,100,50,flow=Background-UDP\n"
        "2011/08/10 09:46:53.500000,0,udp,1.1.1.1,53,<->,2.2.2.2,53,CON,0,0,2,100,50,flow=Background-UDP\n");
    REQUIRE(parsed.flows.size() == 2);
    CHECK(parsed.flows[0].start_time == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(parsed.flows[1].start_time == 0.0);
}

TEST_CASE("hex and decimal ports") {
    CHECK(parse_port("0x0303") == 0x303);
    CHECK(parse_port("80") == 80);
    CHECK(parse_port("") == std::nullopt);
    CHECK(parse_port("http") == std::nullopt);
    CHECK(parse_port("70000") == std::nullopt);
}

TEST_CASE("label taxonomy") {
    CHECK(classify_label("flow=From-Botnet-V42-UDP-DNS") == Tag::Botnet);
    CHECK(classify_label("flow=To-Normal-V42-UDP") == Tag::Normal);
    CHECK(classify_label("") == Tag::Background);
    CHECK(classify_label("flow=From-Botnet-V42-TCP-CC1-HTTP-Not-Encrypted") == Tag::CandC);
    CHECK(classify_label("flow=From-Botnet-V51-1-TCP-CC107-IRC-Not-Encrypted") == Tag::CandC);
    CHECK(classify_label("FLOW=FROM-BOTNET-V42-UDP") == Tag::Botnet);
    CHECK(classify_label("flow=Background-Established-cmpgw-CVUT") == Tag::Background);
    // "CC" outside a botnet label does not make C&C.
    CHECK(classify_label("flow=To-Normal-CC1") == Tag::Normal);
    CHECK(is_attack(Tag::CandC));
    CHECK_FALSE(is_attack(Tag::Background));
}

TEST_CASE("timestamps round-trip") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::int64_t> us(0, 4'000'000'000'000'000LL);
    for (int i = 0; i < 500; ++i) {
        const std::int64_t t = us(rng);
        const auto back = parse_timestamp(format_timestamp(t));
        REQUIRE(back.has_value());
        CHECK(*back == t);
    }
    CHECK(format_timestamp(0) == "1970/01/01 00:00:00.000000");
    CHECK_FALSE(parse_timestamp("2011/13/10 09:46:53.0").has_value());
}

TEST_CASE("serialised records re-parse to identical records") {
    SynthSpec spec;
    spec.n_background_flows = 300;
    spec.attack_bursts = 4;
    spec.decoy_bursts = 2;
    spec.trace_seconds = 120;
    spec.attack = AttackKind::IrcLike;
    const SyntheticTrace trace = generate_synthetic(spec);
    std::stringstream buffer;
    write_binetflow(buffer, trace.flows, trace.epoch_us);
    const auto parsed = parse_binetflow(buffer, spec.scenario_id);
    REQUIRE(parsed.flows.size() == trace.flows.size());
    CHECK(parsed.stats.skipped == 0);
    CHECK(parsed.stats.epoch_us == trace.epoch_us);
    for (std::size_t i = 0; i < trace.flows.size(); ++i) CHECK(parsed.flows[i] == trace.flows[i]);

    std::stringstream again;
    write_binetflow(again, parsed.flows, parsed.stats.epoch_us);
    CHECK(again.str() == buffer.str());
}

TEST_CASE("label with embedded commas survives as the last column") {
    const auto parsed = parse(
        "2011/08/10 09:46:53.0,0,tcp,1.1.1.1,1,->,2.2.2.2,2,S_,0,0,1,10,5,flow=From-Botnet,V42,odd\n");
    REQUIRE(parsed.flows.size() == 1);
    CHECK(parsed.flows[0].label == "flow=From-Botnet,V42,odd");
    CHECK(parsed.flows[0].tag == Tag::Botnet);
}

TEST_CASE("normalised dump has the documented columns") {
    const auto parsed = parse(kSample + "\n");
    std::ostringstream out;
    write_normalized_csv(out, parsed.flows);
    const std::string text = out.str();
    CHECK(text.substr(0, text.find('\n')) ==
          "start_time,duration,proto,src_addr,src_port,dir,dst_addr,dst_port,state,stos,tot_pkts,tot_bytes,src_bytes,"
          "tag,scenario_id");
}
