#include <gtest/gtest.h>

#include <cstdlib>
#include <string>
#include <utility>

#include "semverml/diff/snapshot.hpp"
#include "semverml/js/metrics.hpp"
#include "semverml/js/parser.hpp"
#include "semverml/rng.hpp"

using namespace semverml;
using namespace semverml::js;

namespace {

std::vector<const Node*> collect(const Node& root, NodeKind kind)
{
    std::vector<const Node*> out;
    walk(root, [&](const Node& n) {
        if (n.kind == kind) out.push_back(&n);
    });
    return out;
}

std::string data_dir()
{
    const char* d = std::getenv("SEMVERML_TEST_DATA");
    return d ? d : "tests/data";
}

void expect_spans_nest(const Node& n)
{
    for (const auto& c : n.children) {
        EXPECT_LE(n.span.start_line, c.span.start_line);
        EXPECT_GE(n.span.end_line, c.span.end_line);
        EXPECT_LE(n.begin, c.begin);
        EXPECT_GE(n.end, c.end);
        expect_spans_nest(c);
    }
}

}  // namespace

TEST(Parse, FunctionWithParam)
{
    const auto ast = parse_js("function f(a){return a}");
    const auto fns = collect(ast.root, NodeKind::FunctionDecl);
    ASSERT_EQ(fns.size(), 1u);
    EXPECT_EQ(fns[0]->name, "f");
    const auto params = collect(ast.root, NodeKind::Param);
    ASSERT_EQ(params.size(), 1u);
    EXPECT_EQ(params[0]->name, "a");
}

TEST(Parse, GlobalAndComment)
{
    const auto ast = parse_js("const x = 1; // note");
    const auto vars = collect(ast.root, NodeKind::VarDecl);
    ASSERT_EQ(vars.size(), 1u);
    EXPECT_EQ(vars[0]->name, "x");
    EXPECT_EQ(collect(ast.root, NodeKind::Comment).size(), 1u);
    const auto m = file_metrics(ast, "const x = 1; // note");
    EXPECT_EQ(m.global_var_names, (std::set<std::string>{"x"}));
}

TEST(Parse, EmptySource)
{
    const auto ast = parse_js("");
    EXPECT_EQ(ast.root.kind, NodeKind::Program);
    EXPECT_TRUE(ast.root.children.empty());
}

TEST(Parse, FunctionForms)
{
    const char* src = R"(
var a = function () {};
let b = (x, y) => x + y;
const o = { m() {}, get g() { return 1; }, k: function () {} };
class C extends B { constructor(p) { super(p); } static s() {} }
export default function named(q) {}
async function* gen() { yield 1; }
)";
    const auto ast = parse_js(src);
    EXPECT_EQ(ast.parse_warnings, 0u);
    std::vector<std::string> names;
    walk(ast.root, [&](const Node& n) {
        if (is_function(n.kind)) names.push_back(n.name.value_or("<anon>"));
    });
    EXPECT_EQ(names, (std::vector<std::string>{"a", "b", "m", "g", "k", "constructor", "s", "named", "gen"}));
}

TEST(Parse, OnlyProgramLevelDeclarationsAreGlobals)
{
    const auto ast = parse_js("let a = 1, b = 2;\nfunction f(){ var inner = 3; }\nconst {c, d: [e]} = o;");
    const auto m = file_metrics(ast, "");
    EXPECT_EQ(m.global_var_names, (std::set<std::string>{"a", "b", "c", "e"}));
}

TEST(Parse, CommentsAttachToDeepestNode)
{
    const auto ast = parse_js("function f() {\n  // inside\n  return 1;\n}\n/* outside */\n");
    ASSERT_EQ(ast.root.children.size(), 2u);
    const auto& fn = ast.root.children[0];
    EXPECT_EQ(fn.kind, NodeKind::FunctionDecl);
    EXPECT_EQ(collect(fn, NodeKind::Comment).size(), 1u);
    EXPECT_EQ(ast.root.children[1].kind, NodeKind::Comment);
}

TEST(Parse, TextHashIsNormalizedSlice)
{
    const std::string src = "function  f(a) {\n\treturn   a;\n}\nconst x = [1,\n 2];\n";
    const auto ast = parse_js(src);
    walk(ast.root, [&](const Node& n) {
        EXPECT_EQ(n.text_hash, normalized_hash(std::string_view(src).substr(n.begin, n.end - n.begin)));
    });
    // whitespace-only differences do not change the hash
    const auto other = parse_js("function f(a) { return a; }");
    EXPECT_EQ(ast.root.children[0].text_hash, other.root.children[0].text_hash);
}

TEST(Parse, SpansNest)
{
    const auto src = diff::read_file(data_dir() + "/cyclomatic_fixture.js");
    ASSERT_TRUE(src);
    const auto ast = parse_js(*src);
    expect_spans_nest(ast.root);
}

TEST(Parse, UnparseableRegionBecomesOther)
{
    const auto ast = parse_js("function ok() {}\n) ) ] @@@ ;\nfunction alsoOk() {}\n");
    EXPECT_GT(ast.parse_warnings, 0u);
    EXPECT_GE(collect(ast.root, NodeKind::Other).size(), 1u);
    EXPECT_EQ(collect(ast.root, NodeKind::FunctionDecl).size(), 2u);
}

TEST(Parse, TotalOnRandomBytes)
{
    Rng rng(2024);
    for (int trial = 0; trial < 1500; ++trial) {
        std::string s(rng.below(400), '\0');
        for (auto& c : s) c = static_cast<char>(rng.below(256));
        const auto ast = parse_js(s);
        EXPECT_EQ(ast.root.kind, NodeKind::Program);
        expect_spans_nest(ast.root);
    }
}

TEST(Parse, TotalOnTokenSoup)
{
    static const char* pieces[] = {"function", "(", ")", "{", "}", "[", "]", "=>", "if", "else", "for", "while",
                                   "x", "1", ";", ",", "?", ":", "&&", "||", "/", "`a${", "'s", "\"", "//c\n",
                                   "/*", "*/", "class", "=", ".", "new", "return", "\n", "case", "switch", "do"};
    Rng rng(7);
    for (int trial = 0; trial < 1500; ++trial) {
        std::string s;
        const auto n = rng.below(120);
        for (std::size_t i = 0; i < n; ++i) {
            s += pieces[rng.below(std::size(pieces))];
            s += ' ';
        }
        const auto ast = parse_js(s);
        EXPECT_EQ(ast.root.kind, NodeKind::Program);
        expect_spans_nest(ast.root);
    }
}

TEST(Parse, DeepNestingDegradesGracefully)
{
    const std::string deep = std::string(20000, '(') + "x" + std::string(20000, ')');
    const auto a = parse_js("var v = " + deep + ";");
    EXPECT_EQ(a.root.kind, NodeKind::Program);
    std::string blocks;
    for (int i = 0; i < 5000; ++i) blocks += "function f(){ ";
    const auto b = parse_js(blocks);
    EXPECT_EQ(b.root.kind, NodeKind::Program);
    EXPECT_GT(b.parse_warnings, 0u);
}

TEST(Cyclomatic, DocumentedExamples)
{
    EXPECT_EQ(cyclomatic(parse_js("function f(){}")).total, 1);
    EXPECT_EQ(cyclomatic(parse_js("function f(x){ if(x) return 1; return 2 }")).total, 2);
    EXPECT_EQ(cyclomatic(parse_js("function f(a,b){ return a && b ? 1 : 0 }")).total, 3);
}

TEST(Cyclomatic, NestedFunctionsCountSeparately)
{
    const auto r = cyclomatic(parse_js("function outer(a){ if (a) { const g = () => a || 1; } }"));
    ASSERT_EQ(r.functions.size(), 2u);
    EXPECT_EQ(r.functions[0].complexity, 2);
    EXPECT_EQ(r.functions[1].complexity, 2);
    EXPECT_EQ(r.total, 4);
}

TEST(Cyclomatic, ProgramLevelDecisionsAreNotFunctions)
{
    const auto r = cyclomatic(parse_js("if (a) { b(); } const c = d ? 1 : 2;"));
    EXPECT_TRUE(r.functions.empty());
    EXPECT_EQ(r.total, 0);
}

TEST(Cyclomatic, FifteenFunctionFixture)
{
    const auto src = diff::read_file(data_dir() + "/cyclomatic_fixture.js");
    ASSERT_TRUE(src);
    const auto ast = parse_js(*src);
    EXPECT_EQ(ast.parse_warnings, 0u);
    const auto r = cyclomatic(ast);
    const std::vector<std::pair<std::string, long>> expected = {
        {"onlyIf", 2}, {"elseIf", 3}, {"countFor", 2}, {"keysForIn", 2}, {"valuesForOf", 2},
        {"spin", 2},   {"atLeastOnce", 2}, {"pick", 4}, {"safeParse", 2}, {"ternary", 2},
        {"both", 2},   {"either", 2}, {"blend", 7}, {"nested", 6}, {"f", 2}};
    ASSERT_EQ(r.functions.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) {
        EXPECT_EQ(r.functions[i].name.value_or(""), expected[i].first);
        EXPECT_EQ(r.functions[i].complexity, expected[i].second) << expected[i].first;
    }
}

namespace {

// Emits a statement with a known number of decision points.
std::pair<std::string, int> gen_statement(Rng& rng, int depth)
{
    auto body = [&](int d) {
        std::string s;
        int n = 0;
        const auto k = rng.below(3);
        for (std::size_t i = 0; i < k; ++i) {
            auto [t, c] = gen_statement(rng, d);
            s += t;
            n += c;
        }
        return std::pair{s, n};
    };
    const auto pick = depth > 3 ? 9 + rng.below(7) : rng.below(16);
    switch (pick) {
    case 0: { auto [b, n] = body(depth + 1); return {"if (x) { " + b + "}\n", 1 + n}; }
    case 1: {
        auto [b1, n1] = body(depth + 1);
        auto [b2, n2] = body(depth + 1);
        return {"if (x) { " + b1 + "} else if (y) { " + b2 + "} else { z(); }\n", 2 + n1 + n2};
    }
    case 2: { auto [b, n] = body(depth + 1); return {"for (let i = 0; i < n; i++) { " + b + "}\n", 1 + n}; }
    case 3: { auto [b, n] = body(depth + 1); return {"for (const k in o) { " + b + "}\n", 1 + n}; }
    case 4: { auto [b, n] = body(depth + 1); return {"for (const v of xs) { " + b + "}\n", 1 + n}; }
    case 5: { auto [b, n] = body(depth + 1); return {"while (n--) { " + b + "}\n", 1 + n}; }
    case 6: { auto [b, n] = body(depth + 1); return {"do { " + b + "} while (q);\n", 1 + n}; }
    case 7: {
        auto [b, n] = body(depth + 1);
        return {"switch (k) { case 1: " + b + "break; case 2: case 3: g(); break; default: h(); }\n", 3 + n};
    }
    case 8: {
        auto [b1, n1] = body(depth + 1);
        auto [b2, n2] = body(depth + 1);
        return {"try { " + b1 + "} catch (e) { " + b2 + "} finally { done(); }\n", 1 + n1 + n2};
    }
    case 9: return {"r = a ? b : c;\n", 1};
    case 10: return {"r = a && b;\n", 1};
    case 11: return {"r = a || b;\n", 1};
    case 12: return {"r = a ?? b;\n", 0};
    case 13: return {"call(x, y);\n", 0};
    case 14: return {"const local = () => (p ? q : s);\n", 0};  // own function
    default: return {"return;\n", 0};
    }
}

}  // namespace

TEST(Cyclomatic, DecisionCountPlusOneProperty)
{
    Rng rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        std::string body;
        int n = 0;
        const auto stmts = 1 + rng.below(5);
        for (std::size_t i = 0; i < stmts; ++i) {
            auto [s, c] = gen_statement(rng, 0);
            body += s;
            n += c;
        }
        const auto ast = parse_js("function target(x, y) {\n" + body + "}\n");
        ASSERT_EQ(ast.parse_warnings, 0u) << body;
        const auto r = cyclomatic(ast);
        ASSERT_FALSE(r.functions.empty());
        EXPECT_EQ(r.functions[0].complexity, n + 1) << body;
    }
}

TEST(FileMetrics, AverageAndLoc)
{
    const std::string src = "function a(){}\n\nfunction b(x){ if (x) {} if (!x) {} }\nvar g;\n";
    const auto m = file_metrics(parse_js(src), src);
    EXPECT_EQ(m.function_count, 2);
    EXPECT_EQ(m.cyclomatic_total, 4);
    EXPECT_DOUBLE_EQ(m.cyclomatic_avg, 2.0);
    EXPECT_EQ(m.loc, 3);
    EXPECT_GE(m.cyclomatic_total, m.function_count);
}

TEST(FileMetrics, FiveLinesOneBlank)
{
    EXPECT_EQ(count_loc("a\nb\n\nc\nd"), 4);
    EXPECT_EQ(count_loc("a\nb\n   \nc\nd\n"), 4);
}

TEST(FileMetrics, NoFunctionsAverageZero)
{
    const std::string src = "var a = 1;\n";
    const auto m = file_metrics(parse_js(src), src);
    EXPECT_EQ(m.function_count, 0);
    EXPECT_DOUBLE_EQ(m.cyclomatic_avg, 0.0);
}

TEST(FileMetrics, Deterministic)
{
    const auto src = diff::read_file(data_dir() + "/cyclomatic_fixture.js");
    ASSERT_TRUE(src);
    const auto a = file_metrics(parse_js(*src), *src);
    const auto b = file_metrics(parse_js(*src), *src);
    EXPECT_EQ(a.loc, b.loc);
    EXPECT_EQ(a.cyclomatic_total, b.cyclomatic_total);
    EXPECT_EQ(a.comment_nodes.size(), b.comment_nodes.size());
}
