#include <gtest/gtest.h>

#include <atomic>
#include <mutex>
#include <set>

#include "facts/error.hpp"
#include "facts/filter.hpp"
#include "facts/io.hpp"
#include "facts/vectorize.hpp"
#include "mock_server.hpp"
#include "temp_dir.hpp"

using namespace facts;
using namespace facts::filter;
using facts::testing::MockReply;
using facts::testing::MockRequest;
using facts::testing::MockServer;
using facts::testing::TempDir;

namespace {

ingest::Chunk make_chunk(std::string source_id, std::size_t index, std::string text) {
    ingest::Chunk c;
    c.source_id = std::move(source_id);
    c.index = index;
    c.char_count = text.size();
    c.text = std::move(text);
    return c;
}

ModelEndpointConfig endpoint_for(const MockServer& server) {
    ModelEndpointConfig cfg;
    cfg.base_url = server.base_url();
    cfg.timeout = std::chrono::seconds(5);
    cfg.retry_backoff = std::chrono::milliseconds(1);
    return cfg;
}

// Replies from a fixed script keyed by chunk text.
ChunkResponder scripted(std::map<std::string, std::string> replies, std::atomic<int>* calls = nullptr) {
    return [replies = std::move(replies), calls](std::string_view, const ingest::Chunk& c) {
        if (calls) ++*calls;
        return replies.at(c.text);
    };
}

}  // namespace

TEST(BuildPrompt, SubstitutesQuestionAndChunk) {
    const auto prompt = build_prompt("How will AI change education?", make_chunk("a", 0, "AI tutors adapt content."));
    EXPECT_NE(prompt.find("How will AI change education?"), std::string::npos);
    EXPECT_NE(prompt.find("AI tutors adapt content."), std::string::npos);
    EXPECT_NE(prompt.find("reply with exactly NO ANSWER"), std::string::npos);
}

TEST(BuildPrompt, EmptyChunkAndEmptyQuestion) {
    const auto prompt = build_prompt("Q", make_chunk("a", 0, ""), "q={question} c=[{chunk}]");
    EXPECT_EQ(prompt, "q=Q c=[]");
    EXPECT_THROW(build_prompt("", make_chunk("a", 0, "x")), EmptyQuestion);
    EXPECT_THROW(build_prompt("  ", make_chunk("a", 0, "x")), EmptyQuestion);
}

TEST(BuildPrompt, PlaceholdersInsideValuesAreNotExpanded) {
    EXPECT_EQ(build_prompt("{chunk}?", make_chunk("a", 0, "{question}"), "{question}|{chunk}"),
              "{chunk}?|{question}");
}

TEST(QueryModel, ReturnsResponseFieldAndSendsContract) {
    std::mutex m;
    nlohmann::json seen;
    std::string path;
    MockServer server([&](const MockRequest& r) {
        std::lock_guard lock(m);
        seen = nlohmann::json::parse(r.body);
        path = r.path;
        return MockReply{200, R"({"response": "OK", "done": true})", "application/json"};
    });
    EXPECT_EQ(query_model("hello", endpoint_for(server)), "OK");
    EXPECT_EQ(path, "/api/generate");
    EXPECT_EQ(seen["model"], "llama3.1");
    EXPECT_EQ(seen["prompt"], "hello");
    EXPECT_EQ(seen["stream"], false);
    EXPECT_EQ(seen["options"]["temperature"], 0.0);
}

TEST(QueryModel, ServerErrorsExhaustRetries) {
    std::atomic<int> hits{0};
    MockServer server([&](const MockRequest&) {
        ++hits;
        return MockReply{500, "boom"};
    });
    auto cfg = endpoint_for(server);
    cfg.max_retries = 2;
    EXPECT_THROW(query_model("p", cfg), ModelUnavailable);
    EXPECT_EQ(hits.load(), 3);
}

TEST(QueryModel, RecoversWithinRetryBudget) {
    std::atomic<int> hits{0};
    MockServer server([&](const MockRequest&) {
        return ++hits < 3 ? MockReply{502, ""} : MockReply{200, R"({"response":"late"})"};
    });
    EXPECT_EQ(query_model("p", endpoint_for(server)), "late");
}

TEST(QueryModel, MissingFieldIsMalformed) {
    MockServer server([](const MockRequest&) { return MockReply{200, R"({"text": "OK"})"}; });
    EXPECT_THROW(query_model("p", endpoint_for(server)), MalformedResponse);
    MockServer garbage([](const MockRequest&) { return MockReply{200, "not json"}; });
    EXPECT_THROW(query_model("p", endpoint_for(garbage)), MalformedResponse);
}

TEST(QueryModel, ConfigurableFieldNames) {
    MockServer server([](const MockRequest& r) {
        const auto body = nlohmann::json::parse(r.body);
        return MockReply{200, nlohmann::json{{"text", body["input"].get<std::string>() + "!"}}.dump()};
    });
    auto cfg = endpoint_for(server);
    cfg.prompt_field = "input";
    cfg.response_field = "text";
    EXPECT_EQ(query_model("hi", cfg), "hi!");
}

TEST(QueryModel, ClientErrorIsNotRetriedAndUnreachableFails) {
    std::atomic<int> hits{0};
    MockServer server([&](const MockRequest&) {
        ++hits;
        return MockReply{404, "no model"};
    });
    EXPECT_THROW(query_model("p", endpoint_for(server)), ModelUnavailable);
    EXPECT_EQ(hits.load(), 1);

    ModelEndpointConfig dead;
    dead.base_url = "http://127.0.0.1:1";
    dead.retry_backoff = std::chrono::milliseconds(1);
    dead.timeout = std::chrono::seconds(2);
    EXPECT_THROW(query_model("p", dead), ModelUnavailable);
}

TEST(EndpointConfig, Validation) {
    ModelEndpointConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.max_parallel = 0;
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.timeout = std::chrono::seconds(0);
    EXPECT_THROW(cfg.validate(), ConfigError);
    cfg = {};
    cfg.base_url = "ftp://host";
    EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(ClassifyResponse, Examples) {
    EXPECT_EQ(classify_response("NO ANSWER").verdict, Verdict::NotRelevant);
    EXPECT_EQ(classify_response("  no answer. ").verdict, Verdict::NotRelevant);
    EXPECT_EQ(classify_response("No Answer!").verdict, Verdict::NotRelevant);
    const auto rel = classify_response("AI enables personalized learning paths.");
    EXPECT_EQ(rel.verdict, Verdict::Relevant);
    EXPECT_EQ(rel.answer, "AI enables personalized learning paths.");
    EXPECT_EQ(classify_response("  spaced  ").answer, "spaced");
    EXPECT_EQ(classify_response("   ").verdict, Verdict::NotRelevant);
}

TEST(ClassifyResponse, ReclassifyingAnAnswerIsStable) {
    for (const char* raw : {"Teachers gain time.", " AI helps. ", "Answer: none of that", "NO ANSWERS here"}) {
        const auto first = classify_response(raw);
        const auto second = classify_response(first.answer);
        if (first.verdict == Verdict::Relevant) {
            EXPECT_EQ(second.verdict, Verdict::Relevant) << raw;
            EXPECT_EQ(second.answer, first.answer);
        }
    }
}

TEST(MockResponder, EchoesMatchingSentences) {
    const auto responder = mock_responder({"how", "will", "the", "of"});
    const auto chunk = make_chunk("a", 0, "The hall was renovated. AI tutors adapt content. Lunch is at noon.");
    EXPECT_EQ(responder("How will the use of AI change education?", chunk), "AI tutors adapt content.");
    EXPECT_EQ(responder("How will the use of AI change education?", make_chunk("a", 1, "Nothing here.")),
              "NO ANSWER");
}

TEST(RunFilter, CountsRecordsAndWritesAnalysisFile) {
    TempDir work;
    const std::vector<std::vector<ingest::Chunk>> docs{
        {make_chunk("d1", 0, "one"), make_chunk("d1", 1, "two"), make_chunk("d1", 2, "three")}};
    const auto records = run_filter(docs, "Q?", scripted({{"one", "First."}, {"two", "NO ANSWER"}, {"three", "Third."}}),
                                    work.path());
    ASSERT_EQ(records.size(), 3u);
    EXPECT_EQ(std::count_if(records.begin(), records.end(),
                            [](const AnswerRecord& r) { return r.verdict == Verdict::Relevant; }),
              2);
    EXPECT_EQ(read_file(work / "analysis/d1.txt"),
              "## chunk 0\nverdict: relevant\nFirst.\n\n"
              "## chunk 1\nverdict: not relevant\n\n\n"
              "## chunk 2\nverdict: relevant\nThird.\n\n");
}

TEST(RunFilter, ResumesWithoutRequeryingAnsweredChunks) {
    TempDir work;
    const std::vector<std::vector<ingest::Chunk>> docs{
        {make_chunk("d1", 0, "a"), make_chunk("d1", 1, "b"), make_chunk("d1", 2, "c")}};
    std::atomic<int> calls{0};
    auto failing = [&](std::string_view, const ingest::Chunk& c) -> std::string {
        ++calls;
        if (c.index == 2) throw ModelUnavailable("down");
        return "answer " + c.text;
    };
    EXPECT_THROW(run_filter(docs, "Q?", failing, work.path()), ModelUnavailable);
    EXPECT_EQ(calls.load(), 3);

    std::vector<std::size_t> queried;
    auto healthy = [&](std::string_view, const ingest::Chunk& c) {
        queried.push_back(c.index);
        return "answer " + c.text;
    };
    const auto records = run_filter(docs, "Q?", healthy, work.path());
    EXPECT_EQ(queried, std::vector<std::size_t>{2});
    ASSERT_EQ(records.size(), 3u);
    EXPECT_EQ(records[1].answer, "answer b");
    EXPECT_EQ(records[2].answer, "answer c");
}

TEST(RunFilter, CheckpointOfAnotherQuestionIsIgnored) {
    TempDir work;
    const std::vector<std::vector<ingest::Chunk>> docs{{make_chunk("d1", 0, "a")}};
    std::atomic<int> calls{0};
    run_filter(docs, "First?", scripted({{"a", "x"}}, &calls), work.path());
    run_filter(docs, "Second?", scripted({{"a", "x"}}, &calls), work.path());
    EXPECT_EQ(calls.load(), 2);
    run_filter(docs, "Second?", scripted({{"a", "x"}}, &calls), work.path());
    EXPECT_EQ(calls.load(), 2);
}

TEST(RunFilter, EmptyInputWritesNothing) {
    TempDir work;
    EXPECT_TRUE(run_filter({}, "Q?", scripted({}), work.path()).empty());
    EXPECT_TRUE(std::filesystem::is_empty(work.path()));
}

TEST(RunFilter, OrderIndependentOfSchedulingAndInputOrder) {
    std::vector<std::vector<ingest::Chunk>> docs;
    std::map<std::string, std::string> replies;
    for (int d = 0; d < 5; ++d) {
        std::vector<ingest::Chunk> doc;
        for (int i = 0; i < 6; ++i) {
            const std::string text = "d" + std::to_string(d) + "c" + std::to_string(i);
            doc.push_back(make_chunk("doc" + std::to_string(d), static_cast<std::size_t>(i), text));
            replies[text] = (d + i) % 3 == 0 ? "NO ANSWER" : "about " + text;
        }
        docs.push_back(std::move(doc));
    }
    TempDir serial, parallel;
    const auto a = run_filter(docs, "Q?", scripted(replies), serial.path(), {.max_parallel = 1});
    std::reverse(docs.begin(), docs.end());
    const auto b = run_filter(docs, "Q?", scripted(replies), parallel.path(), {.max_parallel = 6});
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.size(), 30u);
    for (std::size_t i = 1; i < a.size(); ++i)
        EXPECT_LT(std::tie(a[i - 1].source_id, a[i - 1].chunk_index), std::tie(a[i].source_id, a[i].chunk_index));
    EXPECT_EQ(read_file(serial / "analysis/doc3.txt"), read_file(parallel / "analysis/doc3.txt"));
}

TEST(RunFilter, HttpResponderAgainstMockServer) {
    MockServer server([](const MockRequest& r) {
        const auto prompt = nlohmann::json::parse(r.body)["prompt"].get<std::string>();
        const bool relevant = prompt.find("tutors") != std::string::npos;
        return MockReply{200, nlohmann::json{{"response", relevant ? "Tutors adapt." : "NO ANSWER"}}.dump()};
    });
    TempDir work;
    const auto records = run_filter({{make_chunk("a", 0, "AI tutors"), make_chunk("a", 1, "canteen menu")}}, "Q?",
                                    http_responder(endpoint_for(server)), work.path(), {.max_parallel = 2});
    ASSERT_EQ(records.size(), 2u);
    EXPECT_EQ(records[0].verdict, Verdict::Relevant);
    EXPECT_EQ(records[1].verdict, Verdict::NotRelevant);
}

TEST(ExportAnswers, KeepsRelevantRowsInOrder) {
    TempDir dir;
    const std::vector<AnswerRecord> records{{"b", 0, Verdict::Relevant, "Second"},
                                            {"a", 1, Verdict::NotRelevant, ""},
                                            {"a", 0, Verdict::Relevant, "First, with comma"}};
    const auto path = export_answers_csv(records, dir / "answers.csv");
    EXPECT_EQ(read_file(path), "source_id,chunk_index,answer\na,0,\"First, with comma\"\nb,0,Second\n");
    const auto bytes = read_file(path);
    export_answers_csv(records, path);
    EXPECT_EQ(read_file(path), bytes);
    const auto loaded = load_answers_csv(path);
    ASSERT_EQ(loaded.size(), 2u);
    EXPECT_EQ(loaded[0], (AnswerRecord{"a", 0, Verdict::Relevant, "First, with comma"}));
}

TEST(ExportAnswers, AllIrrelevantGivesHeaderOnly) {
    TempDir dir;
    export_answers_csv({{"a", 0, Verdict::NotRelevant, ""}}, dir / "answers.csv");
    EXPECT_EQ(read_file(dir / "answers.csv"), "source_id,chunk_index,answer\n");
    EXPECT_TRUE(load_answers_csv(dir / "answers.csv").empty());
    EXPECT_THROW(load_answers_csv(dir / "missing.csv"), MissingFile);
}
