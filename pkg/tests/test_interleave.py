"""
Tests for the interleaved token codec and its file formats.
"""

import random

import pytest

from speechlm_runtime.errors import ConfigError, InvalidToken, MalformedSequence
from speechlm_runtime.interleave import (
    ByteTokenizer,
    Channel,
    InterleaveConfig,
    InterleavedSequence,
    Token,
    demux,
    interleaved_length,
    mux,
)
from speechlm_runtime.interleave.codec import AUDIO_PAD, TEXT_PAD, text_id_span
from speechlm_runtime.interleave.token_file import (
    decode_sequence,
    encode_sequence,
    read_sequence,
    read_token_list,
    write_sequence,
    write_token_list,
)

PT = TEXT_PAD
PA = AUDIO_PAD


def _random_channels(rng, max_len):
    # pad ids are not valid channel tokens
    text = [rng.randrange(0, 256) for _ in range(rng.randint(0, max_len))]
    audio = [rng.randrange(0, PA) for _ in range(rng.randint(0, max_len))]
    return text, audio


def _ids(seq):
    return [(t.channel, t.id) for t in seq.tokens]


class TestInterleaveConfig:
    def test_defaults(self):
        cfg = InterleaveConfig()
        assert (cfg.n_text, cfg.n_audio) == (1, 3)
        assert cfg.text_pad == 256
        assert cfg.audio_pad == 6599
        assert cfg.audio_vocab_size == 6600
        assert cfg.block_size == 4

    @pytest.mark.parametrize("n_text,n_audio", [(0, 3), (1, 0), (-1, 2)])
    def test_ratio_must_be_positive(self, n_text, n_audio):
        with pytest.raises(ConfigError):
            InterleaveConfig(n_text, n_audio)

    def test_audio_pad_inside_vocabulary(self):
        with pytest.raises(ConfigError):
            InterleaveConfig(audio_pad=6600)

    def test_channel_at(self, cfg_1_2):
        assert [cfg_1_2.channel_at(p) for p in range(6)] == [
            Channel.TEXT,
            Channel.AUDIO,
            Channel.AUDIO,
            Channel.TEXT,
            Channel.AUDIO,
            Channel.AUDIO,
        ]


class TestMux:
    def test_empty_inputs(self, cfg_1_2):
        assert len(mux([], [], cfg_1_2)) == 0

    def test_text_shorter_than_audio(self, cfg_1_2):
        seq = mux([1, 2], [10, 11, 12, 13, 14], cfg_1_2)
        assert [t.id for t in seq] == [1, 10, 11, 2, 12, 13, PT, 14, PA]
        assert [t.channel for t in seq][:3] == [Channel.TEXT, Channel.AUDIO, Channel.AUDIO]

    def test_audio_channel_fully_padded(self, cfg_1_2):
        seq = mux([1, 2, 3], [], cfg_1_2)
        assert [t.id for t in seq] == [1, PA, PA, 2, PA, PA, 3, PA, PA]

    def test_out_of_vocabulary_audio_names_index(self, cfg_1_2):
        with pytest.raises(InvalidToken) as exc:
            mux([1], [5, 6600, 7], cfg_1_2)
        assert exc.value.index == 1
        assert exc.value.token_id == 6600

    def test_negative_audio_id_rejected(self, cfg_1_2):
        with pytest.raises(InvalidToken):
            mux([], [-1], cfg_1_2)

    def test_audio_pad_id_rejected(self, cfg_1_2):
        with pytest.raises(InvalidToken) as exc:
            mux([1, 2], [5, PA, 6], cfg_1_2)
        assert exc.value.index == 1
        assert exc.value.token_id == PA
        assert exc.value.channel == "audio"

    def test_text_pad_id_rejected(self, cfg_1_2):
        with pytest.raises(InvalidToken) as exc:
            mux([1, PT, 3], [5], cfg_1_2)
        assert exc.value.index == 1
        assert exc.value.channel == "text"
        assert "text token 256 at index 1" in str(exc.value)

    def test_negative_text_id_rejected(self, cfg_1_2):
        with pytest.raises(InvalidToken) as exc:
            mux([-3], [], cfg_1_2)
        assert exc.value.index == 0

    def test_pad_ids_never_vanish_on_round_trip(self, cfg_1_2):
        # a trailing pad-valued token would be indistinguishable from padding
        for text, audio in [([1, PT], [5]), ([1], [5, PA])]:
            with pytest.raises(InvalidToken):
                demux(mux(text, audio, cfg_1_2), strip_padding=True)

    def test_padding_minimality(self):
        rng = random.Random(7)
        for _ in range(300):
            cfg = InterleaveConfig(rng.randint(1, 8), rng.randint(1, 8))
            text, audio = _random_channels(rng, 60)
            seq = mux(text, audio, cfg)
            blocks = seq.num_blocks
            text_pads = sum(1 for t in seq if t.channel == Channel.TEXT and t.id == PT)
            audio_pads = sum(1 for t in seq if t.channel == Channel.AUDIO and t.id == PA)
            assert text_pads == blocks * cfg.n_text - len(text)
            assert audio_pads == blocks * cfg.n_audio - len(audio)


class TestInterleavedLength:
    @pytest.mark.parametrize("text_len,audio_len,expected", [(0, 0, 0), (2, 5, 9), (3, 0, 9)])
    def test_examples(self, cfg_1_2, text_len, audio_len, expected):
        assert interleaved_length(text_len, audio_len, cfg_1_2) == expected

    def test_agrees_with_mux(self):
        rng = random.Random(11)
        for _ in range(10_000):
            cfg = InterleaveConfig(rng.randint(1, 8), rng.randint(1, 8))
            text_len, audio_len = rng.randint(0, 40), rng.randint(0, 40)
            seq = mux([1] * text_len, [1] * audio_len, cfg)
            assert interleaved_length(text_len, audio_len, cfg) == len(seq)


class TestDemux:
    def test_strips_trailing_pads(self, cfg_1_2):
        seq = InterleavedSequence.from_tokens(
            [Token.text(1), Token.audio(10), Token.audio(11), Token.text(PT), Token.audio(12), Token.audio(PA)],
            cfg_1_2,
        )
        assert demux(seq, strip_padding=True) == ([1], [10, 11, 12])

    def test_without_stripping_keeps_full_channels(self, cfg_1_2):
        seq = mux([1, 2], [10, 11, 12, 13, 14], cfg_1_2)
        text, audio = demux(seq, strip_padding=False)
        assert len(text) == seq.num_blocks * cfg_1_2.n_text
        assert len(audio) == seq.num_blocks * cfg_1_2.n_audio
        assert text[-1] == PT and audio[-1] == PA

    def test_tag_violation_reports_position(self):
        cfg = InterleaveConfig(1, 1)
        seq = InterleavedSequence(
            (Token.text(1), Token.audio(10), Token.audio(11), Token.text(2)), cfg
        )
        with pytest.raises(MalformedSequence) as exc:
            demux(seq)
        assert exc.value.position == 2

    def test_length_not_multiple_of_block(self, cfg_1_2):
        seq = InterleavedSequence((Token.text(1), Token.audio(10)), cfg_1_2)
        with pytest.raises(MalformedSequence):
            demux(seq)

    def test_token_after_padding_rejected(self, cfg_1_2):
        tokens = [Token.text(PT), Token.audio(1), Token.audio(2), Token.text(5), Token.audio(3), Token.audio(4)]
        with pytest.raises(MalformedSequence) as exc:
            InterleavedSequence.from_tokens(tokens, cfg_1_2)
        assert exc.value.position == 3

    def test_round_trip_random(self):
        rng = random.Random(3)
        for _ in range(2_000):
            cfg = InterleaveConfig(rng.randint(1, 8), rng.randint(1, 8))
            text, audio = _random_channels(rng, 200)
            assert demux(mux(text, audio, cfg), strip_padding=True) == (text, audio)

    def test_round_trip_exhaustive_small(self):
        for n_text in range(1, 4):
            for n_audio in range(1, 4):
                cfg = InterleaveConfig(n_text, n_audio)
                for text_len in range(13):
                    for audio_len in range(13):
                        text = list(range(text_len))
                        audio = list(range(100, 100 + audio_len))
                        seq = mux(text, audio, cfg)
                        assert len(seq) == interleaved_length(text_len, audio_len, cfg)
                        assert demux(seq) == (text, audio)


class TestStreamAndIdView:
    def test_from_stream_pads_truncated_block(self, cfg_1_2):
        seq = InterleavedSequence.from_stream([Token.text(1), Token.audio(10), Token.audio(11), Token.text(2)], cfg_1_2)
        assert [t.id for t in seq] == [1, 10, 11, 2, PA, PA]

    def test_id_offset_view_inverse(self):
        cfg = InterleaveConfig()
        seq = mux([72, 105], [0, 5, 6598, 17], cfg)
        ids = seq.to_ids()
        offset = text_id_span(cfg)
        assert offset == 257
        assert ids[1] == offset + 0
        assert _ids(InterleavedSequence.from_ids(ids, cfg)) == _ids(seq)


class TestByteTokenizer:
    def test_utf8_round_trip(self):
        tok = ByteTokenizer()
        ids = tok.encode("héllo 你好")
        assert all(0 <= i < 256 for i in ids)
        assert tok.decode(ids) == "héllo 你好"

    def test_decode_skips_pads(self):
        tok = ByteTokenizer()
        assert tok.decode([104, 105, PT, PT]) == "hi"


class TestTokenFiles:
    def test_ilv1_header_layout(self, cfg_1_2):
        data = encode_sequence(mux([1], [2, 3], cfg_1_2))
        assert data[:4] == b"ILV1"
        assert int.from_bytes(data[4:8], "little") == 1
        assert int.from_bytes(data[8:12], "little") == 2
        assert len(data) == 20 + 3 * 5
        assert data[20] == 0 and data[25] == 1

    def test_sequence_file(self, tmp_path, cfg_1_2):
        seq = mux([1, 2], [10, 11, 12], cfg_1_2)
        path = str(tmp_path / "seq.ilv")
        write_sequence(path, seq)
        assert _ids(read_sequence(path)) == _ids(seq)

    def test_bad_magic(self):
        with pytest.raises(MalformedSequence):
            decode_sequence(b"NOPE" + bytes(16))

    def test_truncated_body(self, cfg_1_2):
        data = encode_sequence(mux([1], [2, 3], cfg_1_2))
        with pytest.raises(MalformedSequence):
            decode_sequence(data[:-2])

    def test_token_list_file(self, tmp_path):
        path = str(tmp_path / "ids.txt")
        write_token_list(path, [3, 1, 4, 1, 5])
        assert read_token_list(path) == [3, 1, 4, 1, 5]
        with open(path) as f:
            assert f.read() == "3\n1\n4\n1\n5\n"
