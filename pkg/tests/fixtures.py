"""Shared test fixtures: exemplar QA strings and mock endpoint helpers."""

from __future__ import annotations

import json

import httpx

# Knowledge Q&A exemplar
MIAO_QUESTION = "苗族古歌的主要演唱场合有哪些?"
MIAO_ANSWER = (
    "苗族古歌古词神话大多在鼓社祭、婚丧活动、亲友聚会和节日等场合演唱, "
    "演唱者多为中老年人、巫师、歌手等。酒席是演唱古歌的重要场合。"
)

# Terminology-interpretation exemplar
MIAO_TERM = "苗族古歌"
MIAO_TERM_EXPLANATION = (
    "苗族古歌内容包罗万象, 从宇宙的诞生、人类和物种的起源、开天辟地、"
    "初民时期的滔天洪水...今天, 这些古歌古词神话还在民间流传唱诵。"
)

# Synthetic-data exemplars (source text -> generated QA pairs)
MANG_QUESTION = "在传统戏服中，‘蟒’分为哪两种，分别适用于什么角色？"
MANG_ANSWER = (
    "在传统戏服中，‘蟒’分男蟒和女蟒。男蟒是戏中帝王将相、文武百官的朝服，"
    "也是参加重大礼仪活动的礼服。女蟒则是后妃、女将等角色穿的朝服和礼服。"
)
KESI_QUESTION = "缂丝使用梭子的方法与一般织布有何不同？"
KESI_ANSWER = (
    "一般织布是梭子穿过所有经线再返回，那叫通梭。但缂丝时，梭子常常是穿过"
    "一定数量的经线就返回，这叫“断纬”。‘通经断纬’是缂丝特有的技法，就是"
    "经线贯穿整个布面，不同的梭子里装上所需的彩色纬线，按照不同的纹样图案，"
    "在不同的地方回返，区分分片缂织。"
)

QA_SYNTH_PROMPT = (
    "我要制作一批非遗领域的知识问答数据，接下来你需要根据给出的非遗领域文本，"
    "对其进行表述和格式的修改，形成一批问答数据。\n\n{source_text}"
)


def completion_json(text: str) -> dict:
    return {"choices": [{"message": {"role": "assistant", "content": text}}]}


def static_transport(reply_text: str) -> httpx.MockTransport:
    """Mock endpoint that always returns the same completion."""
    return httpx.MockTransport(
        lambda _req: httpx.Response(200, json=completion_json(reply_text))
    )


def qa_fixture_transport(pairs: list[tuple[str, str]]) -> httpx.MockTransport:
    """Mock endpoint replaying fixed QA pairs as the JSON-array contract."""
    payload = json.dumps(
        [{"question": q, "answer": a} for q, a in pairs], ensure_ascii=False
    )
    return static_transport(payload)


def reference_echo_transport(by_message: dict[str, str]) -> httpx.MockTransport:
    """Mock endpoint mapping an exact user message to a fixed reply."""

    def handler(request: httpx.Request) -> httpx.Response:
        body = json.loads(request.content)
        message = body["messages"][-1]["content"]
        return httpx.Response(200, json=completion_json(by_message.get(message, "")))

    return httpx.MockTransport(handler)
