/*
 * Copyright 2026 The Forge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include "corpus.hpp"
#include "forge/python/parser.hpp"

namespace py = forge::python;

TEST(PythonLexer, IndentDedentBalance) {
  auto toks = py::tokenize("if x:\n    y = 1\n    if z:\n        w()\nq = 2\n");
  int depth = 0;
  for (const auto& t : toks) {
    if (t.kind == py::TokenKind::Indent) ++depth;
    if (t.kind == py::TokenKind::Dedent) --depth;
    EXPECT_GE(depth, 0);
  }
  EXPECT_EQ(depth, 0);
  EXPECT_EQ(toks.back().kind, py::TokenKind::EndMarker);
}

TEST(PythonLexer, BracketsJoinLines) {
  auto toks = py::tokenize("f(a,\n  b)\n");
  int newlines = 0;
  for (const auto& t : toks) newlines += t.kind == py::TokenKind::Newline;
  EXPECT_EQ(newlines, 1);
}

TEST(PythonLexer, StringsKeepPrefixAndQuotes) {
  auto toks = py::tokenize("s = rb'x\\'y'\nt = \"\"\"a\nb\"\"\"\n");
  EXPECT_EQ(toks[2].text, "rb'x\\'y'");
  EXPECT_EQ(toks[6].text, "\"\"\"a\nb\"\"\"");
}

TEST(PythonLexer, RejectsBadInput) {
  EXPECT_THROW(py::tokenize("s = 'open\n"), py::ParseError);
  EXPECT_THROW(py::tokenize("if x:\n    a\n  b\n"), py::ParseError);
  EXPECT_THROW(py::tokenize("x = $\n"), py::ParseError);
}

TEST(PythonParser, ParsesEveryFixture) {
  for (const char* name : {"b1_extern_convolution.py", "b2_torch_bmm.py", "c3_ex2_conv3d_module.py",
                           "c3_ex3_identity_store.py", "g1_add.py", "g1_add_reference.py"}) {
    EXPECT_TRUE(py::parses(forge::testing::fixture(name))) << name;
  }
}

TEST(PythonParser, StatementShapes) {
  auto m = py::parse(
      "import torch.nn as nn\n"
      "from triton import language as tl\n"
      "@triton.jit\n"
      "def k(x_ptr, BLOCK: tl.constexpr):\n"
      "    pid = tl.program_id(0)\n"
      "class M(nn.Module):\n"
      "    def forward(self, x):\n"
      "        return x @ x\n");
  ASSERT_EQ(m.body.size(), 4u);
  EXPECT_EQ(m.body[0]->kind, py::StmtKind::Import);
  EXPECT_EQ(m.body[0]->aliases[0].name, "torch.nn");
  EXPECT_EQ(m.body[0]->aliases[0].asname, "nn");
  EXPECT_EQ(m.body[1]->kind, py::StmtKind::ImportFrom);
  EXPECT_EQ(m.body[2]->kind, py::StmtKind::FunctionDef);
  EXPECT_EQ(m.body[2]->decorators.size(), 1u);
  EXPECT_EQ(m.body[2]->params.size(), 2u);
  EXPECT_EQ(m.body[3]->kind, py::StmtKind::ClassDef);
  const auto& ret = m.body[3]->body[0]->body[0];
  ASSERT_EQ(ret->kind, py::StmtKind::Return);
  EXPECT_EQ(ret->value->kind, py::ExprKind::BinOp);
  EXPECT_EQ(ret->value->text, "@");
}

TEST(PythonParser, ModernSyntax) {
  EXPECT_TRUE(py::parses("if (n := len(a)) > 3:\n    pass\n"));
  EXPECT_TRUE(py::parses("def f(a, /, b, *, c=1, **kw):\n    return f'{a!r:>{b}}'\n"));
  EXPECT_TRUE(py::parses("match p:\n    case [x, *rest]:\n        pass\n    case {'k': v}:\n        pass\n"));
  EXPECT_TRUE(py::parses("async def g():\n    async with a as b:\n        await b\n"));
  EXPECT_TRUE(py::parses("x = [i for i in range(3) if i]\ny = {k: v for k, v in d.items()}\n"));
  EXPECT_TRUE(py::parses("grid = lambda meta: (triton.cdiv(n, meta['B']),)\n"));
}

TEST(PythonParser, RejectsInvalid) {
  EXPECT_FALSE(py::parses("def broken(:\n    return\n"));
  EXPECT_FALSE(py::parses("x = (1, 2\n"));
  EXPECT_FALSE(py::parses("class A\n    pass\n"));
  EXPECT_FALSE(py::parses("return = 3\n"));
}

TEST(PythonParser, ErrorCarriesLocation) {
  try {
    py::parse("a = 1\nb = (\n");
    FAIL() << "expected ParseError";
  } catch (const py::ParseError& e) {
    EXPECT_GE(e.location().line, 2);
  }
}
